#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmlo/formula.hpp"

namespace pmlo {

enum class TrackKind { Proposition, FirstOrder, SecondOrder };

struct Track {
  std::string name;
  TrackKind kind = TrackKind::Proposition;
  bool operator==(const Track&) const = default;
};

// A letter is a boolean tuple, one bit per track, packed into a uint64.
struct TrackAlphabet {
  std::vector<Track> tracks;

  std::size_t width() const { return tracks.size(); }
  int index_of(const std::string& name) const;  // -1 when absent
  bool operator==(const TrackAlphabet&) const = default;
};

using Letter = std::uint64_t;

// Care/don't-care pattern: the edge fires on letters l with (l & mask) == bits.
struct SymbolicEdge {
  Letter mask = 0;
  Letter bits = 0;
  int target = -1;

  bool matches(Letter l) const { return (l & mask) == bits; }
};

// Acceptance over the infinite-visit set of a run:
//   Buchi:   accepting iff inf(run) meets `accepting`
//   CoBuchi: accepting iff inf(run) avoids `accepting` (the set then acts as
//            the rejecting set)
// Weak automata (every SCC uniformly accepting or not) use Buchi acceptance;
// projections can legitimately leave the weak class, which the co-Büchi mode
// captures exactly.
enum class Acceptance { Buchi, CoBuchi };

struct BuchiAutomaton {
  TrackAlphabet alphabet;
  int initial = 0;
  std::vector<std::vector<SymbolicEdge>> edges;  // per state; partitions letters
  std::vector<bool> accepting;
  Acceptance acceptance = Acceptance::Buchi;
  bool weak = false;

  std::size_t num_states() const { return edges.size(); }
  int step(int state, Letter letter) const;  // total deterministic transition
  int run_word(const std::vector<Letter>& word) const;  // state after the word
};

// Post-construction verification of the representation invariants: exactly
// one successor per concrete letter (over the referenced tracks), and SCC
// uniformity when the weak flag is set.  Enabled via set_validation().
void debug_validate(const BuchiAutomaton& a);
void set_validation(bool enabled);
bool validation_enabled();

// Tracks referenced by any edge mask.
std::vector<int> referenced_tracks(const BuchiAutomaton& a);

// --- closure operations (deterministic in, deterministic out) -------------

BuchiAutomaton complement_weak(const BuchiAutomaton& a);
BuchiAutomaton intersect(const BuchiAutomaton& a, const BuchiAutomaton& b);
BuchiAutomaton unite(const BuchiAutomaton& a, const BuchiAutomaton& b);

// Wellformedness-guarded projection of one track followed by break-point
// determinization and weak normalization (Büchi-mode non-weak inputs are not
// determinizable this way and raise NOT_WEAK_CONVERTIBLE).
BuchiAutomaton project_and_determinize(const BuchiAutomaton& a, const std::string& track);

// Attempts to re-flag the automaton as weak by SCC purity analysis; returns
// the (possibly unchanged) automaton.
BuchiAutomaton weak_normalize(BuchiAutomaton a);

// Drops states unreachable from the initial state and merges mergeable edges.
BuchiAutomaton trim(const BuchiAutomaton& a);

// Alphabet surgery. restrict_alphabet requires that no kept edge references a
// dropped track.
BuchiAutomaton pad_alphabet(const BuchiAutomaton& a, const TrackAlphabet& wider);
BuchiAutomaton restrict_alphabet(const BuchiAutomaton& a, const TrackAlphabet& narrower);

// --- membership and emptiness ---------------------------------------------

bool accepts_lasso(const BuchiAutomaton& a, const std::vector<Letter>& stem,
                   const std::vector<Letter>& loop);

struct LassoWord {
  std::vector<Letter> stem;
  std::vector<Letter> loop;
};
std::optional<LassoWord> nonempty_witness(const BuchiAutomaton& a);

bool is_empty(const BuchiAutomaton& a);
bool is_universal(const BuchiAutomaton& a);

// One-state universal/empty automata over the given alphabet.
BuchiAutomaton universal_automaton(const TrackAlphabet& alphabet);
BuchiAutomaton empty_automaton(const TrackAlphabet& alphabet);

// Track wellformedness recognizers used at projection and elimination time:
// exactly one 1 (first-order) and finitely many 1s (second-order).
BuchiAutomaton exactly_one_automaton(const TrackAlphabet& alphabet, int track);
BuchiAutomaton finitely_many_automaton(const TrackAlphabet& alphabet, int track);

// Documented text form of the automaton (states, edges with care-pattern
// letters, accepting set).
std::string automaton_text(const BuchiAutomaton& a);

}  // namespace pmlo
