#include "pmlo/automaton.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <sstream>

#include "pmlo/errors.hpp"

namespace pmlo {

int TrackAlphabet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < tracks.size(); ++i)
    if (tracks[i].name == name) return static_cast<int>(i);
  return -1;
}

int BuchiAutomaton::step(int state, Letter letter) const {
  for (const SymbolicEdge& e : edges[state])
    if (e.matches(letter)) return e.target;
  return -1;
}

int BuchiAutomaton::run_word(const std::vector<Letter>& word) const {
  int q = initial;
  for (Letter l : word) {
    q = step(q, l);
    if (q < 0) fail(errc::bad_model, "automaton is not total");
  }
  return q;
}

namespace {

std::atomic<bool> g_validate{true};

// Iterative Tarjan; returns component id per state, ids in reverse
// topological order of discovery (not relied upon).
struct SccResult {
  std::vector<int> comp;
  int count = 0;
};

template <typename Succs>
SccResult scc_decompose(std::size_t n, Succs succs) {
  SccResult res;
  res.comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  int next_index = 0;

  struct Frame {
    int v;
    std::size_t child = 0;
    std::vector<int> succ;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> frames;
    frames.push_back({static_cast<int>(root)});
    frames.back().succ = succs(static_cast<int>(root));
    index[root] = low[root] = next_index++;
    stack.push_back(static_cast<int>(root));
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.child < f.succ.size()) {
        int w = f.succ[f.child++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w});
          frames.back().succ = succs(w);
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            res.comp[w] = res.count;
            if (w == f.v) break;
          }
          ++res.count;
        }
        int v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  return res;
}

std::vector<int> automaton_succs(const BuchiAutomaton& a, int q) {
  std::vector<int> out;
  for (const SymbolicEdge& e : a.edges[q]) out.push_back(e.target);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// True when the subgraph induced by `keep` contains a cycle.
bool cycle_within(const BuchiAutomaton& a, const std::vector<bool>& keep) {
  std::size_t n = a.num_states();
  auto succs = [&](int q) {
    std::vector<int> out;
    if (!keep[q]) return out;
    for (const SymbolicEdge& e : a.edges[q])
      if (keep[e.target]) out.push_back(e.target);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  SccResult scc = scc_decompose(n, succs);
  std::vector<int> size(scc.count, 0);
  for (std::size_t q = 0; q < n; ++q)
    if (keep[q]) size[scc.comp[q]]++;
  for (std::size_t q = 0; q < n; ++q) {
    if (!keep[q]) continue;
    for (const SymbolicEdge& e : a.edges[q]) {
      if (!keep[e.target] || scc.comp[e.target] != scc.comp[q]) continue;
      if (e.target == static_cast<int>(q)) return true;  // self-loop
      if (size[scc.comp[q]] > 1) return true;            // nonsingleton SCC has a cycle
    }
  }
  return false;
}

std::vector<int> referenced_bits(Letter mask) {
  std::vector<int> out;
  for (int i = 0; i < 64; ++i)
    if (mask & (Letter(1) << i)) out.push_back(i);
  return out;
}

void coalesce_state(std::vector<SymbolicEdge>& edges) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::sort(edges.begin(), edges.end(), [](const SymbolicEdge& x, const SymbolicEdge& y) {
      return std::tie(x.target, x.mask, x.bits) < std::tie(y.target, y.mask, y.bits);
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const SymbolicEdge& x, const SymbolicEdge& y) {
                              return x.target == y.target && x.mask == y.mask && x.bits == y.bits;
                            }),
                edges.end());
    for (std::size_t i = 0; i < edges.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < edges.size() && !changed; ++j) {
        if (edges[i].target != edges[j].target || edges[i].mask != edges[j].mask) continue;
        Letter diff = edges[i].bits ^ edges[j].bits;
        if (diff != 0 && (diff & (diff - 1)) == 0) {  // one cared bit apart
          edges[i].mask &= ~diff;
          edges[i].bits &= ~diff;
          edges.erase(edges.begin() + j);
          changed = true;
        }
      }
    }
  }
}

void coalesce(BuchiAutomaton& a) {
  for (auto& st : a.edges) coalesce_state(st);
}

}  // namespace

void set_validation(bool enabled) { g_validate = enabled; }
bool validation_enabled() { return g_validate; }

std::vector<int> referenced_tracks(const BuchiAutomaton& a) {
  Letter mask = 0;
  for (const auto& st : a.edges)
    for (const SymbolicEdge& e : st) mask |= e.mask;
  return referenced_bits(mask);
}

void debug_validate(const BuchiAutomaton& a) {
  if (!g_validate) return;
  std::size_t n = a.num_states();
  if (a.accepting.size() != n) fail(errc::bad_model, "accepting vector size mismatch");
  if (a.initial < 0 || a.initial >= static_cast<int>(n))
    fail(errc::bad_model, "initial state out of range");
  for (const auto& st : a.edges)
    for (const SymbolicEdge& e : st)
      if (e.target < 0 || e.target >= static_cast<int>(n))
        fail(errc::bad_model, "edge target out of range");

  // Determinism and totality, checked letter by letter over referenced tracks.
  for (std::size_t q = 0; q < n; ++q) {
    Letter mask = 0;
    for (const SymbolicEdge& e : a.edges[q]) mask |= e.mask;
    std::vector<int> bits = referenced_bits(mask);
    if (bits.size() > 16) continue;  // sampling would be too slow; skip
    for (Letter assignment = 0; assignment < (Letter(1) << bits.size()); ++assignment) {
      Letter letter = 0;
      for (std::size_t i = 0; i < bits.size(); ++i)
        if (assignment & (Letter(1) << i)) letter |= Letter(1) << bits[i];
      int matches = 0;
      for (const SymbolicEdge& e : a.edges[q])
        if (e.matches(letter)) ++matches;
      if (matches != 1)
        fail(errc::bad_model, "state " + std::to_string(q) + " has " + std::to_string(matches) +
                                  " successors on a letter");
    }
  }

  if (a.weak) {
    if (a.acceptance != Acceptance::Buchi)
      fail(errc::bad_model, "weak automata use Buchi acceptance");
    SccResult scc = scc_decompose(n, [&](int q) { return automaton_succs(a, q); });
    std::vector<int> verdict(scc.count, -1);
    for (std::size_t q = 0; q < n; ++q) {
      int& v = verdict[scc.comp[q]];
      int mine = a.accepting[q] ? 1 : 0;
      if (v == -1) v = mine;
      else if (v != mine)
        fail(errc::bad_model, "weak flag set but an SCC mixes acceptance");
    }
  }
}

BuchiAutomaton weak_normalize(BuchiAutomaton a) {
  if (a.weak) return a;
  std::size_t n = a.num_states();
  SccResult scc = scc_decompose(n, [&](int q) { return automaton_succs(a, q); });
  std::vector<std::vector<int>> members(scc.count);
  for (std::size_t q = 0; q < n; ++q) members[scc.comp[q]].push_back(static_cast<int>(q));

  std::vector<bool> scc_accepting(scc.count, false);
  for (int c = 0; c < scc.count; ++c) {
    bool nontrivial = false;
    for (int q : members[c])
      for (const SymbolicEdge& e : a.edges[q])
        if (scc.comp[e.target] == c && (members[c].size() > 1 || e.target == q)) nontrivial = true;
    if (!nontrivial) continue;

    bool has_marked = false;
    for (int q : members[c]) has_marked |= a.accepting[q];
    std::vector<bool> unmarked(n, false);
    for (int q : members[c]) unmarked[q] = !a.accepting[q];
    bool cycle_avoiding = cycle_within(a, unmarked);

    bool can_accept, can_reject;
    if (a.acceptance == Acceptance::Buchi) {
      can_accept = has_marked;       // cycle through a marked state
      can_reject = cycle_avoiding;   // cycle avoiding marked states
    } else {
      can_accept = cycle_avoiding;
      can_reject = has_marked;
    }
    if (can_accept && can_reject) return a;  // genuinely not weak on this structure
    scc_accepting[c] = can_accept;
  }

  for (std::size_t q = 0; q < n; ++q) a.accepting[q] = scc_accepting[scc.comp[q]];
  a.acceptance = Acceptance::Buchi;
  a.weak = true;
  debug_validate(a);
  return a;
}

BuchiAutomaton trim(const BuchiAutomaton& a) {
  std::size_t n = a.num_states();
  std::vector<int> remap(n, -1);
  std::vector<int> order;
  remap[a.initial] = 0;
  order.push_back(a.initial);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const SymbolicEdge& e : a.edges[order[i]]) {
      if (remap[e.target] == -1) {
        remap[e.target] = static_cast<int>(order.size());
        order.push_back(e.target);
      }
    }
  }
  BuchiAutomaton out;
  out.alphabet = a.alphabet;
  out.initial = 0;
  out.acceptance = a.acceptance;
  out.weak = a.weak;
  out.edges.resize(order.size());
  out.accepting.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.accepting[i] = a.accepting[order[i]];
    for (SymbolicEdge e : a.edges[order[i]]) {
      e.target = remap[e.target];
      out.edges[i].push_back(e);
    }
  }
  coalesce(out);
  return out;
}

BuchiAutomaton complement_weak(const BuchiAutomaton& a) {
  BuchiAutomaton out = a;
  if (a.weak) {
    for (std::size_t q = 0; q < out.accepting.size(); ++q) out.accepting[q] = !out.accepting[q];
  } else {
    out.acceptance = a.acceptance == Acceptance::Buchi ? Acceptance::CoBuchi : Acceptance::Buchi;
  }
  debug_validate(out);
  return out;
}

namespace {

struct PairProduct {
  BuchiAutomaton aut;
  std::vector<std::pair<int, int>> origin;  // product state -> (a-state, b-state)
};

PairProduct raw_product(const BuchiAutomaton& a, const BuchiAutomaton& b) {
  PairProduct out;
  out.aut.alphabet = a.alphabet;
  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> frontier;
  auto intern = [&](int qa, int qb) {
    auto [it, inserted] = ids.emplace(std::make_pair(qa, qb), static_cast<int>(ids.size()));
    if (inserted) {
      frontier.emplace_back(qa, qb);
      out.origin.emplace_back(qa, qb);
      out.aut.edges.emplace_back();
      out.aut.accepting.push_back(false);
    }
    return it->second;
  };
  out.aut.initial = intern(a.initial, b.initial);
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    auto [qa, qb] = frontier[i];
    int id = ids.at({qa, qb});
    for (const SymbolicEdge& ea : a.edges[qa]) {
      for (const SymbolicEdge& eb : b.edges[qb]) {
        if (((ea.bits ^ eb.bits) & ea.mask & eb.mask) != 0) continue;
        SymbolicEdge e;
        e.mask = ea.mask | eb.mask;
        e.bits = ea.bits | eb.bits;
        e.target = intern(ea.target, eb.target);
        out.aut.edges[id].push_back(e);
      }
    }
  }
  return out;
}

BuchiAutomaton intersect_impl(const BuchiAutomaton& a0, const BuchiAutomaton& b0) {
  BuchiAutomaton a = weak_normalize(a0);
  BuchiAutomaton b = weak_normalize(b0);
  if (!a.weak && b.weak) std::swap(a, b);

  if (a.weak) {
    PairProduct p = raw_product(a, b);
    BuchiAutomaton out = std::move(p.aut);
    if (b.acceptance == Acceptance::Buchi) {
      // Weak left factor: eventually the run sits in accepting SCCs of a, so
      // marking joint acceptance is exact.
      for (std::size_t i = 0; i < p.origin.size(); ++i)
        out.accepting[i] = a.accepting[p.origin[i].first] && b.accepting[p.origin[i].second];
      out.acceptance = Acceptance::Buchi;
      out.weak = a.weak && b.weak;
    } else {
      for (std::size_t i = 0; i < p.origin.size(); ++i)
        out.accepting[i] = !a.accepting[p.origin[i].first] || b.accepting[p.origin[i].second];
      out.acceptance = Acceptance::CoBuchi;
      out.weak = false;
    }
    out = weak_normalize(trim(out));
    debug_validate(out);
    return out;
  }

  if (a.acceptance == Acceptance::CoBuchi && b.acceptance == Acceptance::CoBuchi) {
    PairProduct p = raw_product(a, b);
    BuchiAutomaton out = std::move(p.aut);
    for (std::size_t i = 0; i < p.origin.size(); ++i)
      out.accepting[i] = a.accepting[p.origin[i].first] || b.accepting[p.origin[i].second];
    out.acceptance = Acceptance::CoBuchi;
    out.weak = false;
    out = weak_normalize(trim(out));
    debug_validate(out);
    return out;
  }

  if (a.acceptance == Acceptance::Buchi && b.acceptance == Acceptance::Buchi) {
    // Degeneralized product: a round trips through F_a then F_b; completing a
    // round is the accepting event.
    std::map<std::tuple<int, int, int>, int> ids;
    std::vector<std::tuple<int, int, int>> frontier;
    BuchiAutomaton out;
    out.alphabet = a.alphabet;
    auto phase_next = [&](int phase, int qa, int qb) {
      int p = phase == 2 ? 0 : phase;
      if (p == 0) {
        if (a.accepting[qa] && b.accepting[qb]) return 2;
        return a.accepting[qa] ? 1 : 0;
      }
      return b.accepting[qb] ? 2 : 1;
    };
    auto intern = [&](int qa, int qb, int ph) {
      auto [it, inserted] = ids.emplace(std::make_tuple(qa, qb, ph), static_cast<int>(ids.size()));
      if (inserted) {
        frontier.emplace_back(qa, qb, ph);
        out.edges.emplace_back();
        out.accepting.push_back(ph == 2);
      }
      return it->second;
    };
    out.initial = intern(a.initial, b.initial, 0);
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      auto [qa, qb, ph] = frontier[i];
      int id = ids.at({qa, qb, ph});
      for (const SymbolicEdge& ea : a.edges[qa]) {
        for (const SymbolicEdge& eb : b.edges[qb]) {
          if (((ea.bits ^ eb.bits) & ea.mask & eb.mask) != 0) continue;
          SymbolicEdge e;
          e.mask = ea.mask | eb.mask;
          e.bits = ea.bits | eb.bits;
          e.target = intern(ea.target, eb.target, phase_next(ph, ea.target, eb.target));
          out.edges[id].push_back(e);
        }
      }
    }
    out.acceptance = Acceptance::Buchi;
    out.weak = false;
    out = weak_normalize(trim(out));
    debug_validate(out);
    return out;
  }

  // Büchi x co-Büchi: exact only when one side's verdict is constant per
  // product SCC; otherwise the language needs a Rabin pair.
  const BuchiAutomaton& buchi = a.acceptance == Acceptance::Buchi ? a : b;
  const BuchiAutomaton& cobuchi = a.acceptance == Acceptance::Buchi ? b : a;
  bool buchi_is_left = a.acceptance == Acceptance::Buchi;
  PairProduct p = raw_product(a, b);
  const BuchiAutomaton& prod = p.aut;
  std::size_t n = prod.num_states();
  SccResult scc = scc_decompose(n, [&](int q) { return automaton_succs(prod, q); });
  auto side_state = [&](std::size_t i, bool want_buchi) {
    return want_buchi == buchi_is_left ? p.origin[i].first : p.origin[i].second;
  };

  std::vector<std::vector<int>> members(scc.count);
  for (std::size_t q = 0; q < n; ++q) members[scc.comp[q]].push_back(static_cast<int>(q));

  auto resolve = [&](bool resolve_buchi, std::vector<int>& verdicts) {
    for (int c = 0; c < scc.count; ++c) {
      std::vector<bool> keep(n, false);
      bool nontrivial = false;
      for (int q : members[c]) keep[q] = true;
      for (int q : members[c])
        for (const SymbolicEdge& e : prod.edges[q])
          if (scc.comp[e.target] == c && (members[c].size() > 1 || e.target == q))
            nontrivial = true;
      if (!nontrivial) {
        verdicts[c] = 0;
        continue;
      }
      const BuchiAutomaton& side = resolve_buchi ? buchi : cobuchi;
      bool has_marked = false;
      std::vector<bool> avoid(n, false);
      for (int q : members[c]) {
        bool marked = side.accepting[side_state(q, resolve_buchi)];
        has_marked |= marked;
        avoid[q] = !marked;
      }
      bool cycle_avoiding = cycle_within(prod, avoid);
      bool can_accept = resolve_buchi ? has_marked : cycle_avoiding;
      bool can_reject = resolve_buchi ? cycle_avoiding : has_marked;
      if (can_accept && can_reject) return false;
      verdicts[c] = can_accept ? 1 : 0;
    }
    return true;
  };

  std::vector<int> verdicts(scc.count, 0);
  if (resolve(/*resolve_buchi=*/true, verdicts)) {
    BuchiAutomaton out = p.aut;
    for (std::size_t q = 0; q < n; ++q) {
      bool buchi_ok = verdicts[scc.comp[q]] == 1;
      out.accepting[q] = !buchi_ok || cobuchi.accepting[side_state(q, false)];
    }
    out.acceptance = Acceptance::CoBuchi;
    out.weak = false;
    out = weak_normalize(trim(out));
    debug_validate(out);
    return out;
  }
  if (resolve(/*resolve_buchi=*/false, verdicts)) {
    BuchiAutomaton out = p.aut;
    for (std::size_t q = 0; q < n; ++q) {
      bool cobuchi_ok = verdicts[scc.comp[q]] == 1;
      out.accepting[q] = cobuchi_ok && buchi.accepting[side_state(q, true)];
    }
    out.acceptance = Acceptance::Buchi;
    out.weak = false;
    out = weak_normalize(trim(out));
    debug_validate(out);
    return out;
  }
  fail(errc::not_weak,
       "intersection of a Büchi and a co-Büchi component is not weak-representable here");
}

}  // namespace

BuchiAutomaton intersect(const BuchiAutomaton& a, const BuchiAutomaton& b) {
  if (!(a.alphabet == b.alphabet))
    fail(errc::alphabet_mismatch, "intersect requires identical track alphabets");
  return intersect_impl(a, b);
}

BuchiAutomaton unite(const BuchiAutomaton& a, const BuchiAutomaton& b) {
  if (!(a.alphabet == b.alphabet))
    fail(errc::alphabet_mismatch, "union requires identical track alphabets");
  return complement_weak(intersect_impl(complement_weak(a), complement_weak(b)));
}

BuchiAutomaton universal_automaton(const TrackAlphabet& alphabet) {
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.initial = 0;
  a.edges = {{SymbolicEdge{0, 0, 0}}};
  a.accepting = {true};
  a.weak = true;
  return a;
}

BuchiAutomaton empty_automaton(const TrackAlphabet& alphabet) {
  BuchiAutomaton a = universal_automaton(alphabet);
  a.accepting = {false};
  return a;
}

BuchiAutomaton exactly_one_automaton(const TrackAlphabet& alphabet, int track) {
  Letter bit = Letter(1) << track;
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.initial = 0;
  a.edges.resize(3);
  a.edges[0] = {SymbolicEdge{bit, 0, 0}, SymbolicEdge{bit, bit, 1}};
  a.edges[1] = {SymbolicEdge{bit, 0, 1}, SymbolicEdge{bit, bit, 2}};
  a.edges[2] = {SymbolicEdge{0, 0, 2}};
  a.accepting = {false, true, false};
  a.weak = true;
  debug_validate(a);
  return a;
}

BuchiAutomaton finitely_many_automaton(const TrackAlphabet& alphabet, int track) {
  Letter bit = Letter(1) << track;
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.initial = 0;
  a.edges.resize(2);
  a.edges[0] = {SymbolicEdge{bit, 0, 0}, SymbolicEdge{bit, bit, 1}};
  a.edges[1] = {SymbolicEdge{bit, 0, 0}, SymbolicEdge{bit, bit, 1}};
  a.accepting = {false, true};  // rejecting set under co-Büchi reading
  a.acceptance = Acceptance::CoBuchi;
  a.weak = false;
  debug_validate(a);
  return a;
}

BuchiAutomaton project_and_determinize(const BuchiAutomaton& a, const std::string& track) {
  int idx = a.alphabet.index_of(track);
  if (idx < 0) fail(errc::alphabet_mismatch, "no track named '" + track + "'");
  TrackKind kind = a.alphabet.tracks[idx].kind;

  BuchiAutomaton guarded =
      intersect_impl(a, kind == TrackKind::SecondOrder
                            ? finitely_many_automaton(a.alphabet, idx)
                            : exactly_one_automaton(a.alphabet, idx));
  guarded = weak_normalize(trim(guarded));

  // Rejecting set for the co-Büchi reading of the guarded automaton.
  std::vector<bool> rejecting(guarded.num_states());
  if (guarded.weak) {
    for (std::size_t q = 0; q < guarded.num_states(); ++q) rejecting[q] = !guarded.accepting[q];
  } else if (guarded.acceptance == Acceptance::CoBuchi) {
    for (std::size_t q = 0; q < guarded.num_states(); ++q) rejecting[q] = guarded.accepting[q];
  } else {
    fail(errc::not_weak, "projection of a non-weak Büchi-mode automaton is unsupported");
  }

  // Erase the track; the automaton becomes a nondeterministic co-Büchi
  // automaton over the remaining tracks.
  Letter bit = Letter(1) << idx;
  std::vector<std::vector<SymbolicEdge>> nba(guarded.num_states());
  for (std::size_t q = 0; q < guarded.num_states(); ++q) {
    for (SymbolicEdge e : guarded.edges[q]) {
      e.mask &= ~bit;
      e.bits &= ~bit;
      nba[q].push_back(e);
    }
  }

  Letter refmask = 0;
  for (const auto& st : nba)
    for (const SymbolicEdge& e : st) refmask |= e.mask;
  std::vector<int> refs = referenced_bits(refmask);
  if (refs.size() > 16)
    fail(errc::state_blowup, "projection over " + std::to_string(refs.size()) + " live tracks");

  // Break-point (Miyano–Hayashi) determinization of the co-Büchi NBA.
  using Macro = std::pair<std::vector<int>, std::vector<int>>;  // (S, O), sorted
  std::map<Macro, int> ids;
  std::vector<Macro> frontier;
  BuchiAutomaton out;
  out.alphabet = guarded.alphabet;
  auto intern = [&](Macro m) {
    auto [it, inserted] = ids.emplace(std::move(m), static_cast<int>(ids.size()));
    if (inserted) {
      frontier.push_back(it->first);
      out.edges.emplace_back();
      out.accepting.push_back(it->first.second.empty());  // breakpoint states
    }
    return it->second;
  };
  std::vector<int> s0{guarded.initial};
  std::vector<int> o0;
  if (!rejecting[guarded.initial]) o0.push_back(guarded.initial);
  out.initial = intern({s0, o0});

  constexpr std::size_t kMacroCap = 1u << 20;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    Macro cur = frontier[i];
    int id = ids.at(cur);
    for (Letter assignment = 0; assignment < (Letter(1) << refs.size()); ++assignment) {
      Letter letter = 0;
      for (std::size_t k = 0; k < refs.size(); ++k)
        if (assignment & (Letter(1) << k)) letter |= Letter(1) << refs[k];
      std::set<int> s_next, o_next;
      for (int q : cur.first)
        for (const SymbolicEdge& e : nba[q])
          if (e.matches(letter)) s_next.insert(e.target);
      if (cur.second.empty()) {
        // Fresh obligation set after a breakpoint.
        for (int q : s_next)
          if (!rejecting[q]) o_next.insert(q);
      } else {
        for (int q : cur.second)
          for (const SymbolicEdge& e : nba[q])
            if (e.matches(letter) && !rejecting[e.target]) o_next.insert(e.target);
      }
      SymbolicEdge e;
      e.mask = refmask;
      e.bits = letter;
      e.target = intern({std::vector<int>(s_next.begin(), s_next.end()),
                         std::vector<int>(o_next.begin(), o_next.end())});
      out.edges[id].push_back(e);
      if (ids.size() > kMacroCap)
        fail(errc::state_blowup, "break-point determinization exceeded the state cap");
    }
  }
  out.acceptance = Acceptance::CoBuchi;
  out.weak = false;
  out = weak_normalize(trim(out));
  debug_validate(out);
  return out;
}

namespace {

std::vector<int> remap_table(const TrackAlphabet& from, const TrackAlphabet& to,
                             bool allow_missing) {
  std::vector<int> table(from.tracks.size(), -1);
  for (std::size_t i = 0; i < from.tracks.size(); ++i) {
    int j = to.index_of(from.tracks[i].name);
    if (j < 0 && !allow_missing)
      fail(errc::alphabet_mismatch, "track '" + from.tracks[i].name + "' missing from alphabet");
    table[i] = j;
  }
  return table;
}

Letter remap_bits(Letter value, const std::vector<int>& table) {
  Letter out = 0;
  for (std::size_t i = 0; i < table.size(); ++i)
    if ((value & (Letter(1) << i)) && table[i] >= 0) out |= Letter(1) << table[i];
  return out;
}

}  // namespace

BuchiAutomaton pad_alphabet(const BuchiAutomaton& a, const TrackAlphabet& wider) {
  std::vector<int> table = remap_table(a.alphabet, wider, /*allow_missing=*/false);
  BuchiAutomaton out = a;
  out.alphabet = wider;
  for (auto& st : out.edges)
    for (SymbolicEdge& e : st) {
      e.mask = remap_bits(e.mask, table);
      e.bits = remap_bits(e.bits, table);
    }
  return out;
}

BuchiAutomaton restrict_alphabet(const BuchiAutomaton& a, const TrackAlphabet& narrower) {
  std::vector<int> table = remap_table(a.alphabet, narrower, /*allow_missing=*/true);
  for (const auto& st : a.edges)
    for (const SymbolicEdge& e : st)
      for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i] < 0 && (e.mask & (Letter(1) << i)))
          fail(errc::alphabet_mismatch,
               "automaton still references dropped track '" + a.alphabet.tracks[i].name + "'");
  BuchiAutomaton out = a;
  out.alphabet = narrower;
  for (auto& st : out.edges)
    for (SymbolicEdge& e : st) {
      e.mask = remap_bits(e.mask, table);
      e.bits = remap_bits(e.bits, table);
    }
  return out;
}

bool accepts_lasso(const BuchiAutomaton& a, const std::vector<Letter>& stem,
                   const std::vector<Letter>& loop) {
  if (loop.empty()) fail(errc::bad_model, "lasso loop must be nonempty");
  int q = a.run_word(stem);
  // Iterate the loop until (state at loop start) repeats, then inspect the
  // states visited inside the repeating cycle.
  std::map<int, int> seen;  // state at loop boundary -> iteration index
  std::vector<int> boundary_states;
  std::vector<std::vector<int>> visited_per_iter;
  int iter = 0;
  while (!seen.count(q)) {
    seen[q] = iter++;
    boundary_states.push_back(q);
    std::vector<int> visited;
    for (Letter l : loop) {
      q = a.step(q, l);
      if (q < 0) fail(errc::bad_model, "automaton is not total");
      visited.push_back(q);
    }
    visited_per_iter.push_back(std::move(visited));
  }
  int cycle_start = seen.at(q);
  std::set<int> cycle_states;
  for (int i = cycle_start; i < iter; ++i)
    for (int s : visited_per_iter[i]) cycle_states.insert(s);
  bool meets = false;
  for (int s : cycle_states)
    if (a.accepting[s]) meets = true;
  return a.acceptance == Acceptance::Buchi ? meets : !meets;
}

namespace {

std::optional<std::vector<Letter>> bfs_path(const BuchiAutomaton& a, int from, int to,
                                            bool require_step,
                                            const std::vector<bool>* allowed = nullptr) {
  std::map<int, std::pair<int, Letter>> parent;  // state -> (pred, letter)
  std::vector<int> queue;
  auto push = [&](int s, int pred, Letter l) {
    if (allowed && !(*allowed)[s]) return;
    if (parent.count(s)) return;
    parent[s] = {pred, l};
    queue.push_back(s);
  };
  if (!require_step) {
    if (from == to) return std::vector<Letter>{};
  }
  // Seed with successors of `from` so a nonempty path is found when required.
  for (const SymbolicEdge& e : a.edges[from]) push(e.target, -1, e.bits);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    int s = queue[i];
    if (s == to) {
      std::vector<Letter> letters;
      int cur = s;
      while (true) {
        auto [pred, l] = parent.at(cur);
        letters.push_back(l);
        if (pred == -1) break;
        cur = pred;
      }
      std::reverse(letters.begin(), letters.end());
      return letters;
    }
    for (const SymbolicEdge& e : a.edges[s]) push(e.target, s, e.bits);
  }
  return std::nullopt;
}

}  // namespace

std::optional<LassoWord> nonempty_witness(const BuchiAutomaton& a) {
  std::size_t n = a.num_states();
  std::vector<bool> reachable(n, false);
  std::vector<int> queue{a.initial};
  reachable[a.initial] = true;
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (const SymbolicEdge& e : a.edges[queue[i]])
      if (!reachable[e.target]) {
        reachable[e.target] = true;
        queue.push_back(e.target);
      }

  if (a.acceptance == Acceptance::Buchi) {
    for (std::size_t f = 0; f < n; ++f) {
      if (!reachable[f] || !a.accepting[f]) continue;
      auto loop = bfs_path(a, static_cast<int>(f), static_cast<int>(f), /*require_step=*/true);
      if (!loop) continue;
      auto stem = bfs_path(a, a.initial, static_cast<int>(f), /*require_step=*/false);
      if (!stem) continue;
      return LassoWord{*stem, *loop};
    }
    return std::nullopt;
  }

  // Co-Büchi: a reachable cycle avoiding the rejecting set.
  std::vector<bool> keep(n, false);
  for (std::size_t q = 0; q < n; ++q) keep[q] = reachable[q] && !a.accepting[q];
  for (std::size_t q = 0; q < n; ++q) {
    if (!keep[q]) continue;
    auto loop = bfs_path(a, static_cast<int>(q), static_cast<int>(q), /*require_step=*/true, &keep);
    if (!loop) continue;
    auto stem = bfs_path(a, a.initial, static_cast<int>(q), /*require_step=*/false);
    if (!stem) continue;
    return LassoWord{*stem, *loop};
  }
  return std::nullopt;
}

bool is_empty(const BuchiAutomaton& a) { return !nonempty_witness(a).has_value(); }

bool is_universal(const BuchiAutomaton& a) { return is_empty(complement_weak(a)); }

std::string automaton_text(const BuchiAutomaton& a) {
  std::ostringstream out;
  out << "alphabet:";
  for (const Track& t : a.alphabet.tracks) {
    out << " " << t.name;
    if (t.kind == TrackKind::FirstOrder) out << ":1";
    if (t.kind == TrackKind::SecondOrder) out << ":2";
  }
  out << "\nstates: " << a.num_states() << " initial: " << a.initial << "\n";
  out << "acceptance: " << (a.acceptance == Acceptance::Buchi ? "buchi" : "cobuchi")
      << (a.weak ? " weak" : "") << "\naccepting:";
  for (std::size_t q = 0; q < a.num_states(); ++q)
    if (a.accepting[q]) out << " " << q;
  out << "\nedges:\n";
  for (std::size_t q = 0; q < a.num_states(); ++q) {
    for (const SymbolicEdge& e : a.edges[q]) {
      out << "  " << q << " --[";
      for (std::size_t i = 0; i < a.alphabet.width(); ++i) {
        if (i) out << " ";
        out << a.alphabet.tracks[i].name << "=";
        if (e.mask & (Letter(1) << i))
          out << ((e.bits >> i) & 1);
        else
          out << "*";
      }
      out << "]--> " << e.target << "\n";
    }
  }
  return out.str();
}

}  // namespace pmlo
