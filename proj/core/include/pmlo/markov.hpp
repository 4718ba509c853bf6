#pragma once

#include <string>
#include <vector>

#include "pmlo/formula.hpp"
#include "pmlo/rational.hpp"
#include "pmlo/smp.hpp"

namespace pmlo {

// Bottom strongly connected components of a Markov-process SMP, each sorted,
// listed in order of their smallest state id.
std::vector<std::vector<int>> bscc_decompose(const Smp& chain);

// Exact probability that a run from `from` visits `target` infinitely often
// (Buchi) or eventually avoids it (CoBuchi): reach-probability of the
// accepting BSCCs, by exact rational elimination.
Rational acceptance_probability(const Smp& chain, const std::vector<bool>& target, int from,
                                Acceptance acceptance = Acceptance::Buchi);

struct FlatQuantitativeResult {
  bool verdict = false;
  // One entry per probabilistic operator: rendering, exact measure(s).
  struct Operator {
    std::string text;
    Rational measure;            // mu(body & condition)
    Rational condition_measure;  // mu(condition); 1 for unconditional forms
    bool holds = false;
  };
  std::vector<Operator> operators;
};

// Thm 11 / Cor 33 instances on Markov processes: every probabilistic operator
// has a closed probability-free body, is evaluated exactly, and the residual
// formula is decided against the label language.
FlatQuantitativeResult check_flat_quantitative(const Smp& m, const Formula& f);

}  // namespace pmlo
