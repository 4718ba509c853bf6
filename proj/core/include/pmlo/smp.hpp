#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmlo/automaton.hpp"
#include "pmlo/rational.hpp"

namespace pmlo {

// Finite labelled transition system with exact per-(state,symbol) probability
// distributions.  Nondeterminism is the choice of symbol.
struct Smp {
  std::vector<std::string> symbols;
  std::vector<std::string> props;

  struct State {
    std::string name;
    std::vector<int> labels;  // sorted prop indices
  };
  std::vector<State> states;
  int initial = 0;

  struct Transition {
    int from = 0, symbol = 0, to = 0;
    Rational prob;
  };
  std::vector<Transition> transitions;

  // index: per state, per symbol, transition ids
  std::vector<std::vector<std::vector<int>>> group_index;

  int symbol_id(const std::string& name) const;
  int prop_id(const std::string& name) const;
  int state_id(const std::string& name) const;
  bool has_label(int state, int prop) const;
  const std::vector<int>& group(int state, int symbol) const;
  std::vector<int> enabled_symbols(int state) const;
  void rebuild_index();

  // Sum-to-one per group, no zero probabilities, no dead-end states.
  void validate() const;

  // At most one enabled symbol per state (Markov-process predicate, computed).
  bool is_markov_process() const;
};

struct FiniteRun {
  std::vector<int> states;   // length n+1
  std::vector<int> symbols;  // length n

  std::size_t length() const { return symbols.size(); }
  int state_at(std::size_t k) const { return states.at(k); }
  FiniteRun prefix(std::size_t k) const;
  bool is_prefix_of(const FiniteRun& other) const;
};

// Finite map state -> symbol choice (Def: depends only on the current state).
using MarkovianAdversary = std::vector<int>;

Smp parse_model(const std::string& text);
std::string print_model(const Smp& m);

// Product of transition probabilities along the run; the measure of the
// cylinder of its infinite extensions under any consistent adversary.
Rational cylinder_measure(const Smp& m, const FiniteRun& run);

FiniteRun sample_run(const Smp& m, const MarkovianAdversary& adv, std::size_t steps,
                     std::uint64_t seed);

// Cartesian product with a deterministic automaton over the model's
// proposition tracks plus free-variable tracks.  Product symbols are pairs
// (symbol, beta) with beta ranging over variable-track assignments.
struct ProductSmp {
  Smp smp;
  std::vector<std::pair<int, int>> origin;  // product state -> (model, automaton)
  std::vector<bool> accepting_mark;         // F^M: automaton component accepting
  Acceptance acceptance = Acceptance::Buchi;
  std::vector<int> variable_tracks;         // indices into the automaton alphabet
  std::vector<int> beta_of_symbol;          // product symbol -> beta value
  std::vector<int> base_symbol;             // product symbol -> model symbol
};

ProductSmp build_product(const Smp& m, const BuchiAutomaton& automaton);

}  // namespace pmlo
