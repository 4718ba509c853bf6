#pragma once

#include "pmlo/automaton.hpp"
#include "pmlo/formula.hpp"

namespace pmlo {

// Compiles a probability-free formula to a deterministic automaton over the
// given alphabet, which must carry a track for every atom symbol and free
// variable of the formula.  Bound variables get fresh tracks internally and
// are projected away at their binders.  The result agrees with the formula on
// every word that well-encodes a valuation of the free-variable tracks.
BuchiAutomaton compile_wmlo(const Formula& f, const TrackAlphabet& tracks);

// Alphabet for a formula: one proposition track per atom symbol plus one
// variable track per free variable, in stable order.
TrackAlphabet formula_alphabet(const Formula& f);

}  // namespace pmlo
