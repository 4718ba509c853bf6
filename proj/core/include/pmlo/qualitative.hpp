#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmlo/formula.hpp"
#include "pmlo/logic.hpp"
#include "pmlo/smp.hpp"

namespace pmlo {

// Default cap on explored macro states in the eliminations.
inline constexpr std::size_t kDefaultStateCap = std::size_t(1) << 20;

// End-component based qualitative analyses.  F is a bit mask over states.
// With Buchi acceptance they compute the classic "visits F infinitely often"
// objectives; with CoBuchi acceptance ("eventually avoids F") the accepting
// end components are those with a sub-component disjoint from F.
std::vector<bool> positive_states(const Smp& m, const std::vector<bool>& target,
                                  Acceptance acceptance = Acceptance::Buchi);
std::vector<bool> almost_sure_states(const Smp& m, const std::vector<bool>& target,
                                     Acceptance acceptance = Acceptance::Buchi);

// Maximal end components of the whole MDP (state sets, each with at least one
// internal action).
std::vector<std::vector<int>> maximal_end_components(const Smp& m);

struct EliminationWitness {
  bool almost_sure = false;
  std::size_t target_set_size = 0;  // |F^{>0}| or |F^{=1}|
  std::vector<std::pair<std::string, std::string>> adversary;  // product state -> symbol
  std::vector<std::string> run_prefix;                         // product state names
  std::vector<std::string> subset_trace;                       // Prop-14 strategy trace
};

// Prop 13 / Prop 14 operator eliminations: produce the automaton over the
// body's free-variable tracks recognizing the satisfying valuations.
BuchiAutomaton eliminate_positive(const Smp& m, const BuchiAutomaton& body,
                                  std::size_t state_cap = kDefaultStateCap,
                                  EliminationWitness* witness = nullptr);
BuchiAutomaton eliminate_almost_sure(const Smp& m, const BuchiAutomaton& body,
                                     std::size_t state_cap = kDefaultStateCap,
                                     EliminationWitness* witness = nullptr);

struct QualitativeResult {
  bool verdict = false;
  std::optional<EliminationWitness> witness;       // top-level existential, true verdict
  std::vector<std::string> counterexample_run;     // model states, when verdict is false
};

// Thm 15 pipeline: desugar, eliminate probabilistic operators bottom-up by
// automaton substitution, then decide the residual formula against the
// model's label language.
QualitativeResult check_qualitative(const Smp& m, const Formula& f,
                                    std::size_t state_cap = kDefaultStateCap);

// Decides M |= g for a closed probability-free g (every run, every valuation).
// Exposed for the flat quantitative path and for tests.
bool model_satisfies(const Smp& m, const Formula& probability_free_closed,
                     std::vector<std::string>* counterexample = nullptr);

}  // namespace pmlo
