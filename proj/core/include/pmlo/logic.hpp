#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pmlo/formula.hpp"

namespace pmlo {

enum class FormulaClass { ProbabilityFree, Qualitative, FlatQuantitative, Unsupported };

FormulaClass classify(const Formula& f);

// Rewrites every qualitative probabilistic operator into one of the two
// primitives E P{>0}[.] and E P{=1}[.]; universal surface forms become the
// negated existential dual.  Thresholds strictly between 0 and 1 are left
// untouched (the flat quantitative path evaluates them directly).
// Throws UNSUPPORTED_REDUCTION for qualitative conditionals with no sound
// reduction in the table.
FormulaRef desugar(const Formula& f);

// First-order variables map to naturals, second-order to finite sets.
struct Valuation {
  std::map<std::string, std::uint64_t> first_order;
  std::map<std::string, std::set<std::uint64_t>> second_order;
};

// An ultimately-zero labelled word: per-track bit stems, all tracks zero from
// position stem_length() on.  Tracks are keyed by proposition name (clock
// predicate symbols included).
struct BoundedWord {
  std::map<std::string, std::vector<bool>> tracks;

  std::size_t stem_length() const;
  bool holds(const std::string& prop, std::uint64_t position) const;
};

// Exact Def-2 semantics on ultimately-zero words: quantifiers range over
// {0..stem}, with the stem position acting as the tail representative, and
// set quantifiers over subsets of that window.
bool evaluate_wmlo_bounded(const Formula& f, const BoundedWord& word, const Valuation& v);

}  // namespace pmlo
