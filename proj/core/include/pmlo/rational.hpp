#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace pmlo {

// Exact rational arithmetic everywhere; probabilities are never floats.
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "num", "num/den" and optional leading '-'.  Throws Error(SYNTAX).
Rational parse_rational(const std::string& text);

// Canonical "num/den", or plain "num" for integers.
std::string rational_string(const Rational& value);

enum class Rel { Lt, Le, Eq, Ne, Ge, Gt };

bool rel_holds(const Rational& lhs, Rel rel, const Rational& rhs);
Rel rel_complement(Rel rel);  // negation of the comparison
const char* rel_token(Rel rel);

}  // namespace pmlo
