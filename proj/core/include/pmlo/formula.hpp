#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pmlo/rational.hpp"

namespace pmlo {

struct BuchiAutomaton;

// Clock-predicate atoms over a single step variable: x@t ~ c, x@t - y@t ~ c,
// x+@t ~ c.  Cross-step differences (L_diff) are rejected at parse time.
struct ClockAtom {
  enum class Kind { Value, Diff, Plus };
  Kind kind = Kind::Value;
  std::string x;
  std::string y;  // Diff only
  Rel rel = Rel::Le;
  std::int64_t constant = 0;

  // Canonical proposition-track name, e.g. "cp:x<=2", "cp:x-y=0", "cp:x+>=1".
  std::string symbol() const;
};

enum class FormulaKind {
  True,          // 0-ary atom
  Prop,          // B(t)
  ClockPred,     // clock atom applied to t
  Less,          // t < t'
  Succ,          // t' = t + 1 (internal, produced by the trans translation)
  Member,        // t in X
  ExistsFirst,   // exists t. body
  ExistsSecond,  // existsS X. body
  Not,
  Or,
  Prob,          // E/A P{~ p}[ body | condition ]
  AutomatonAtom  // compiled automaton substituted for an eliminated operator
};

struct Formula;
using FormulaRef = std::shared_ptr<const Formula>;

struct Formula {
  FormulaKind kind = FormulaKind::True;

  std::string name;           // Prop: proposition name
  ClockAtom clock;            // ClockPred
  std::string var;            // Prop/ClockPred/Less/Succ/Member/Exists*
  std::string var2;           // Less/Succ: t'; Member: X

  Rel rel = Rel::Gt;          // Prob
  Rational threshold;         // Prob
  bool universal = false;     // Prob: surface A P{...} form
  bool conditional = false;   // Prob: explicit condition given

  FormulaRef lhs;             // body / first disjunct
  FormulaRef rhs;             // condition / second disjunct

  std::shared_ptr<const BuchiAutomaton> automaton;  // AutomatonAtom
};

FormulaRef f_true();
FormulaRef f_false();  // rendered as "false", represented as not(true)
FormulaRef f_prop(std::string name, std::string var);
FormulaRef f_clock(ClockAtom atom, std::string var);
FormulaRef f_less(std::string t, std::string t2);
FormulaRef f_succ(std::string t, std::string t2);
FormulaRef f_member(std::string t, std::string x);
FormulaRef f_exists_first(std::string t, FormulaRef body);
FormulaRef f_exists_second(std::string x, FormulaRef body);
FormulaRef f_not(FormulaRef body);
FormulaRef f_or(FormulaRef lhs, FormulaRef rhs);
FormulaRef f_and(FormulaRef lhs, FormulaRef rhs);  // sugar: !(!a | !b)
FormulaRef f_prob(Rel rel, Rational threshold, FormulaRef body, FormulaRef condition,
                  bool universal = false, bool conditional = false);
FormulaRef f_automaton(std::shared_ptr<const BuchiAutomaton> automaton);

bool structurally_equal(const Formula& a, const Formula& b);
std::string print_formula(const Formula& f);

// Free variables by sort, in first-occurrence order.
struct FreeVariables {
  std::vector<std::string> first_order;
  std::vector<std::string> second_order;
};
FreeVariables free_variables(const Formula& f);

// Proposition names (including clock-predicate symbols) used by the formula.
std::set<std::string> atom_symbols(const Formula& f);

// All clock atoms occurring anywhere in the formula.
std::vector<ClockAtom> clock_atoms(const Formula& f);

}  // namespace pmlo
