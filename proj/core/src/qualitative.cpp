#include "pmlo/qualitative.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "pmlo/compiler.hpp"
#include "pmlo/errors.hpp"

namespace pmlo {

namespace {

// --- end component machinery ----------------------------------------------

struct SubMdp {
  const Smp* m;
  std::vector<bool> state_in;
  // action_in[q][a]: the (q,a) group is still allowed
  std::vector<std::vector<bool>> action_in;

  explicit SubMdp(const Smp& smp) : m(&smp) {
    state_in.assign(smp.states.size(), true);
    action_in.assign(smp.states.size(), std::vector<bool>(smp.symbols.size(), false));
    for (std::size_t q = 0; q < smp.states.size(); ++q)
      for (std::size_t a = 0; a < smp.symbols.size(); ++a)
        action_in[q][a] = !smp.group(static_cast<int>(q), static_cast<int>(a)).empty();
  }

  std::vector<int> successors(int q) const {
    std::vector<int> out;
    if (!state_in[q]) return out;
    for (std::size_t a = 0; a < m->symbols.size(); ++a) {
      if (!action_in[q][a]) continue;
      for (int id : m->group(q, static_cast<int>(a))) {
        int to = m->transitions[id].to;
        if (state_in[to]) out.push_back(to);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct SccOf {
  std::vector<int> comp;
  int count = 0;
};

SccOf scc_of(const SubMdp& sub) {
  std::size_t n = sub.state_in.size();
  SccOf res;
  res.comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  int next = 0;
  struct Frame {
    int v;
    std::size_t child = 0;
    std::vector<int> succ;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (!sub.state_in[root] || index[root] != -1) continue;
    std::vector<Frame> frames;
    frames.push_back({static_cast<int>(root)});
    frames.back().succ = sub.successors(static_cast<int>(root));
    index[root] = low[root] = next++;
    stack.push_back(static_cast<int>(root));
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.child < f.succ.size()) {
        int w = f.succ[f.child++];
        if (index[w] == -1) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w});
          frames.back().succ = sub.successors(w);
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

// Iteratively removes actions whose support leaves their SCC, then states
// without actions, until stable.  The surviving SCCs with an internal action
// are the maximal end components of the sub-MDP.
std::vector<std::vector<int>> mec_decompose(SubMdp sub) {
  const Smp& m = *sub.m;
  bool changed = true;
  SccOf scc;
  while (changed) {
    changed = false;
    scc = scc_of(sub);
    for (std::size_t q = 0; q < m.states.size(); ++q) {
      if (!sub.state_in[q]) continue;
      bool has_action = false;
      for (std::size_t a = 0; a < m.symbols.size(); ++a) {
        if (!sub.action_in[q][a]) continue;
        bool stays = true;
        for (int id : m.group(static_cast<int>(q), static_cast<int>(a))) {
          int to = m.transitions[id].to;
          if (!sub.state_in[to] || scc.comp[to] != scc.comp[q]) stays = false;
        }
        if (!stays) {
          sub.action_in[q][a] = false;
          changed = true;
        } else {
          has_action = true;
        }
      }
      if (!has_action) {
        sub.state_in[q] = false;
        changed = true;
      }
    }
  }
  std::map<int, std::vector<int>> groups;
  for (std::size_t q = 0; q < m.states.size(); ++q)
    if (sub.state_in[q]) groups[scc.comp[q]].push_back(static_cast<int>(q));
  std::vector<std::vector<int>> out;
  for (auto& [c, states] : groups) out.push_back(std::move(states));
  return out;
}

// States of accepting end components under the given acceptance mode.
std::vector<bool> accepting_ec_states(const Smp& m, const SubMdp& context,
                                      const std::vector<bool>& target, Acceptance acceptance) {
  std::vector<bool> out(m.states.size(), false);
  if (acceptance == Acceptance::Buchi) {
    for (const auto& mec : mec_decompose(context)) {
      bool meets = false;
      for (int q : mec) meets |= target[q];
      if (meets)
        for (int q : mec) out[q] = true;
    }
    return out;
  }
  // Co-Büchi: a sub-component fully avoiding `target` must exist; restrict
  // the context and decompose again.
  SubMdp restricted = context;
  for (std::size_t q = 0; q < m.states.size(); ++q) {
    if (target[q]) restricted.state_in[q] = false;
    for (std::size_t a = 0; a < m.symbols.size(); ++a) {
      if (!restricted.action_in[q][a]) continue;
      for (int id : m.group(static_cast<int>(q), static_cast<int>(a)))
        if (target[m.transitions[id].to]) restricted.action_in[q][a] = false;
    }
  }
  for (const auto& mec : mec_decompose(restricted))
    for (int q : mec) out[q] = true;
  return out;
}

std::vector<bool> backward_reach(const Smp& m, const SubMdp& sub, const std::vector<bool>& seeds) {
  std::vector<bool> reach = seeds;
  for (std::size_t q = 0; q < m.states.size(); ++q)
    if (!sub.state_in[q]) reach[q] = false;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t q = 0; q < m.states.size(); ++q) {
      if (!sub.state_in[q] || reach[q]) continue;
      for (int to : sub.successors(static_cast<int>(q))) {
        if (reach[to]) {
          reach[q] = true;
          changed = true;
          break;
        }
      }
    }
  }
  return reach;
}

}  // namespace

std::vector<std::vector<int>> maximal_end_components(const Smp& m) {
  return mec_decompose(SubMdp(m));
}

std::vector<bool> positive_states(const Smp& m, const std::vector<bool>& target,
                                  Acceptance acceptance) {
  SubMdp all(m);
  std::vector<bool> accepting = accepting_ec_states(m, all, target, acceptance);
  return backward_reach(m, all, accepting);
}

std::vector<bool> almost_sure_states(const Smp& m, const std::vector<bool>& target,
                                     Acceptance acceptance) {
  // Greatest fixpoint: restrict to states/actions whose full support stays in
  // the candidate set and from which an accepting EC inside the set is
  // reachable; iterate until stable.
  std::vector<bool> candidate(m.states.size(), true);
  while (true) {
    SubMdp sub(m);
    for (std::size_t q = 0; q < m.states.size(); ++q) {
      sub.state_in[q] = candidate[q];
      for (std::size_t a = 0; a < m.symbols.size(); ++a) {
        if (!sub.action_in[q][a]) continue;
        bool inside = candidate[q];
        for (int id : m.group(static_cast<int>(q), static_cast<int>(a)))
          if (!candidate[m.transitions[id].to]) inside = false;
        sub.action_in[q][a] = inside;
      }
    }
    std::vector<bool> accepting = accepting_ec_states(m, sub, target, acceptance);

    // Almost-sure reachability of the accepting ECs inside the candidate set:
    // a nested greatest fixpoint over support-closed actions.
    std::vector<bool> u = candidate;
    while (true) {
      SubMdp inner(m);
      for (std::size_t q = 0; q < m.states.size(); ++q) {
        inner.state_in[q] = u[q];
        for (std::size_t a = 0; a < m.symbols.size(); ++a) {
          if (!inner.action_in[q][a]) continue;
          bool inside = u[q];
          for (int id : m.group(static_cast<int>(q), static_cast<int>(a)))
            if (!u[m.transitions[id].to]) inside = false;
          inner.action_in[q][a] = inside;
        }
      }
      std::vector<bool> seeds(m.states.size(), false);
      for (std::size_t q = 0; q < m.states.size(); ++q) seeds[q] = u[q] && accepting[q];
      std::vector<bool> reach = backward_reach(m, inner, seeds);
      if (reach == u) break;
      u = reach;
    }
    if (u == candidate) return u;
    candidate = u;
  }
}

namespace {

// Restriction of a product to its beta = 0 transitions (the paper's M').
Smp zero_beta_restriction(const ProductSmp& p) {
  Smp out = p.smp;
  out.transitions.clear();
  for (const Smp::Transition& t : p.smp.transitions)
    if (p.beta_of_symbol[t.symbol] == 0) out.transitions.push_back(t);
  out.rebuild_index();
  return out;
}

TrackAlphabet variable_alphabet(const BuchiAutomaton& body) {
  TrackAlphabet out;
  for (const Track& t : body.alphabet.tracks)
    if (t.kind != TrackKind::Proposition) out.tracks.push_back(t);
  return out;
}

BuchiAutomaton guard_wellformedness(const BuchiAutomaton& body) {
  BuchiAutomaton out = body;
  for (std::size_t i = 0; i < body.alphabet.width(); ++i) {
    const Track& t = body.alphabet.tracks[i];
    if (t.kind == TrackKind::FirstOrder)
      out = intersect(out, exactly_one_automaton(body.alphabet, static_cast<int>(i)));
    else if (t.kind == TrackKind::SecondOrder)
      out = intersect(out, finitely_many_automaton(body.alphabet, static_cast<int>(i)));
  }
  return out;
}

void fill_positive_witness(const ProductSmp& product, const Smp& restricted,
                           const std::vector<bool>& f_pos, EliminationWitness& w) {
  w.almost_sure = false;
  w.target_set_size = static_cast<std::size_t>(std::count(f_pos.begin(), f_pos.end(), true));

  // Run prefix: BFS from the initial product state to F^{>0} inside M'.
  std::vector<int> parent(restricted.states.size(), -2);
  std::vector<int> via_symbol(restricted.states.size(), -1);
  std::vector<int> queue{restricted.initial};
  parent[restricted.initial] = -1;
  int hit = f_pos[restricted.initial] ? restricted.initial : -1;
  for (std::size_t i = 0; i < queue.size() && hit < 0; ++i) {
    for (const Smp::Transition& t : restricted.transitions) {
      if (t.from != queue[i] || parent[t.to] != -2) continue;
      parent[t.to] = t.from;
      via_symbol[t.to] = t.symbol;
      queue.push_back(t.to);
      if (f_pos[t.to]) {
        hit = t.to;
        break;
      }
    }
  }
  if (hit >= 0) {
    std::vector<std::string> rev;
    for (int cur = hit; cur != -1; cur = parent[cur])
      rev.push_back(restricted.states[cur].name);
    w.run_prefix.assign(rev.rbegin(), rev.rend());
  }

  // Markovian adversary: inside F^{>0} prefer actions whose support stays
  // there; elsewhere step along the BFS distance toward F^{>0}.
  std::vector<int> dist(restricted.states.size(), -1);
  std::vector<int> step_symbol(restricted.states.size(), -1);
  // Backward BFS from accepting EC states recorded by the caller through
  // f_pos; approximate by distance-to-f_pos targets that are EC-internal.
  std::vector<int> frontier;
  for (std::size_t q = 0; q < restricted.states.size(); ++q) {
    if (!f_pos[q]) continue;
    dist[q] = 0;
    frontier.push_back(static_cast<int>(q));
  }
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    for (const Smp::Transition& t : restricted.transitions) {
      if (t.to != frontier[i]) continue;
      if (dist[t.from] == -1) {
        dist[t.from] = dist[t.to] + 1;
        step_symbol[t.from] = t.symbol;
        frontier.push_back(t.from);
      }
    }
  }
  for (std::size_t q = 0; q < restricted.states.size(); ++q) {
    int sym = -1;
    if (f_pos[q]) {
      // Prefer an action whose whole support stays in F^{>0}.
      for (int a : restricted.enabled_symbols(static_cast<int>(q))) {
        bool stays = true;
        for (int id : restricted.group(static_cast<int>(q), a))
          if (!f_pos[restricted.transitions[id].to]) stays = false;
        if (stays) {
          sym = a;
          break;
        }
      }
      if (sym < 0 && !restricted.enabled_symbols(static_cast<int>(q)).empty())
        sym = restricted.enabled_symbols(static_cast<int>(q)).front();
    } else if (step_symbol[q] >= 0) {
      sym = step_symbol[q];
    }
    if (sym >= 0)
      w.adversary.emplace_back(restricted.states[q].name, restricted.symbols[sym]);
  }
}

struct MacroKey {
  std::vector<int> subset;
  bool alive = false;
  bool operator<(const MacroKey& other) const {
    return std::tie(alive, subset) < std::tie(other.alive, other.subset);
  }
};

// Deterministic recognizer of "some branch has entered the target set and
// seen only all-zero variable letters since".  Exact on well-encoded words;
// wrapped in a co-Büchi acceptance on the dead-alive bit.
BuchiAutomaton determinize_reach_structure(
    const TrackAlphabet& alphabet, std::size_t beta_count, const std::vector<int>& initial,
    bool initial_alive,
    const std::function<void(const std::vector<int>&, std::size_t, std::vector<int>&, bool&)>&
        step,
    std::size_t state_cap) {
  std::map<MacroKey, int> ids;
  std::vector<MacroKey> frontier;
  BuchiAutomaton out;
  out.alphabet = alphabet;
  auto intern = [&](MacroKey key) {
    auto [it, inserted] = ids.emplace(std::move(key), static_cast<int>(ids.size()));
    if (inserted) {
      frontier.push_back(it->first);
      out.edges.emplace_back();
      out.accepting.push_back(!it->first.alive);  // rejecting set: not alive
    }
    return it->second;
  };
  out.initial = intern({initial, initial_alive});
  Letter full_mask = 0;
  for (std::size_t i = 0; i < alphabet.width(); ++i) full_mask |= Letter(1) << i;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    MacroKey cur = frontier[i];
    int id = ids.at(cur);
    for (std::size_t beta = 0; beta < beta_count; ++beta) {
      std::vector<int> next;
      bool fresh = false;
      step(cur.subset, beta, next, fresh);
      bool alive = (cur.alive && beta == 0) || fresh;
      SymbolicEdge e;
      e.mask = full_mask;
      e.bits = static_cast<Letter>(beta);
      e.target = intern({std::move(next), alive});
      out.edges[id].push_back(e);
    }
    if (ids.size() > state_cap)
      fail(errc::state_blowup,
           "operator elimination exceeded the state cap; frontier size " +
               std::to_string(frontier.size() - i));
  }
  out.acceptance = Acceptance::CoBuchi;
  out.weak = false;
  out = weak_normalize(trim(out));
  debug_validate(out);
  return out;
}

}  // namespace

BuchiAutomaton eliminate_positive(const Smp& m, const BuchiAutomaton& body,
                                  std::size_t state_cap, EliminationWitness* witness) {
  BuchiAutomaton guarded = guard_wellformedness(body);
  ProductSmp product = build_product(m, guarded);
  Smp restricted = zero_beta_restriction(product);
  std::vector<bool> f_pos =
      positive_states(restricted, product.accepting_mark, product.acceptance);

  if (witness) fill_positive_witness(product, restricted, f_pos, *witness);

  TrackAlphabet vars = variable_alphabet(guarded);
  if (vars.width() == 0) {
    return f_pos[product.smp.initial] ? universal_automaton(vars) : empty_automaton(vars);
  }

  std::size_t beta_count = std::size_t(1) << vars.width();
  auto step = [&](const std::vector<int>& subset, std::size_t beta, std::vector<int>& next,
                  bool& fresh) {
    std::set<int> acc;
    for (int q : subset) {
      if (f_pos[q]) {
        if (beta == 0) acc.insert(q);  // the 0...0 self-loop on F^{>0}
        continue;
      }
      for (int a : product.smp.enabled_symbols(q)) {
        if (product.beta_of_symbol[a] != static_cast<int>(beta)) continue;
        for (int id : product.smp.group(q, a)) {
          int to = product.smp.transitions[id].to;
          acc.insert(to);
          if (f_pos[to]) fresh = true;
        }
      }
    }
    next.assign(acc.begin(), acc.end());
  };
  return determinize_reach_structure(vars, beta_count, {product.smp.initial},
                                     f_pos[product.smp.initial], step, state_cap);
}

BuchiAutomaton eliminate_almost_sure(const Smp& m, const BuchiAutomaton& body,
                                     std::size_t state_cap, EliminationWitness* witness) {
  BuchiAutomaton guarded = guard_wellformedness(body);
  ProductSmp product = build_product(m, guarded);
  Smp restricted = zero_beta_restriction(product);
  std::vector<bool> f_as =
      almost_sure_states(restricted, product.accepting_mark, product.acceptance);

  if (witness) {
    witness->almost_sure = true;
    witness->target_set_size = static_cast<std::size_t>(std::count(f_as.begin(), f_as.end(), true));
  }

  auto subset_in_target = [&](const std::vector<int>& g) {
    return std::all_of(g.begin(), g.end(), [&](int q) { return f_as[q]; });
  };

  // Successor subsets for one choice function f : G -> enabled symbols,
  // enumerated as distinct unions to avoid |Delta|^{|G|} blowups.
  auto choice_successors = [&](const std::vector<int>& g, std::size_t beta) {
    std::vector<std::set<int>> unions{{}};
    for (int q : g) {
      std::vector<std::set<int>> options;
      for (int a : product.smp.enabled_symbols(q)) {
        if (product.beta_of_symbol[a] != static_cast<int>(beta)) continue;
        std::set<int> succ;
        for (int id : product.smp.group(q, a)) succ.insert(product.smp.transitions[id].to);
        options.push_back(std::move(succ));
      }
      if (options.empty()) return std::vector<std::set<int>>{};  // q blocks this beta
      std::set<std::set<int>> next;
      for (const auto& u : unions)
        for (const auto& o : options) {
          std::set<int> merged = u;
          merged.insert(o.begin(), o.end());
          next.insert(std::move(merged));
        }
      unions.assign(next.begin(), next.end());
      if (unions.size() > 4096)
        fail(errc::state_blowup, "choice-function enumeration exceeded its cap");
    }
    return unions;
  };

  if (witness && f_as[product.smp.initial]) {
    witness->subset_trace.push_back("{" + product.smp.states[product.smp.initial].name + "}");
  }

  TrackAlphabet vars = variable_alphabet(guarded);
  if (vars.width() == 0)
    return f_as[product.smp.initial] ? universal_automaton(vars) : empty_automaton(vars);

  // Macro states are sets of Prop-14 subsets; each subset is interned.
  std::map<std::vector<int>, int> subset_ids;
  std::vector<std::vector<int>> subsets;
  auto subset_id = [&](std::vector<int> g) {
    auto [it, inserted] = subset_ids.emplace(std::move(g), static_cast<int>(subset_ids.size()));
    if (inserted) subsets.push_back(it->first);
    return it->second;
  };

  std::size_t beta_count = std::size_t(1) << vars.width();
  int g0 = subset_id({product.smp.initial});
  auto step = [&](const std::vector<int>& macro, std::size_t beta, std::vector<int>& next,
                  bool& fresh) {
    std::set<int> acc;
    for (int gid : macro) {
      const std::vector<int> g = subsets[gid];
      if (beta == 0 && subset_in_target(g)) acc.insert(gid);  // self-loop
      for (const auto& u : choice_successors(g, beta)) {
        if (u.empty()) continue;
        int id = subset_id(std::vector<int>(u.begin(), u.end()));
        acc.insert(id);
        if (subset_in_target(subsets[id])) fresh = true;
      }
    }
    next.assign(acc.begin(), acc.end());
    if (subsets.size() > state_cap)
      fail(errc::state_blowup, "Prop-14 subset construction exceeded the state cap");
  };
  return determinize_reach_structure(vars, beta_count, {g0},
                                     subset_in_target(subsets[g0]), step, state_cap);
}

namespace {

TrackAlphabet engine_alphabet(const Formula& f, const Smp& m) {
  TrackAlphabet alphabet;
  for (const std::string& symbol : atom_symbols(f)) {
    if (m.prop_id(symbol) < 0)
      fail(errc::unknown_ref, "formula atom '" + symbol + "' is not a model proposition");
    alphabet.tracks.push_back({symbol, TrackKind::Proposition});
  }
  FreeVariables fv = free_variables(f);
  std::set<std::string> seen;
  for (const std::string& v : fv.first_order) {
    alphabet.tracks.push_back({v, TrackKind::FirstOrder});
    seen.insert(v);
  }
  for (const std::string& v : fv.second_order) {
    alphabet.tracks.push_back({v, TrackKind::SecondOrder});
    seen.insert(v);
  }
  // Substituted automata read variable tracks the formula walker cannot see.
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* cur = stack.back();
    stack.pop_back();
    if (cur->kind == FormulaKind::AutomatonAtom) {
      for (const Track& t : cur->automaton->alphabet.tracks)
        if (t.kind != TrackKind::Proposition && seen.insert(t.name).second)
          alphabet.tracks.push_back(t);
    }
    if (cur->lhs) stack.push_back(cur->lhs.get());
    if (cur->rhs) stack.push_back(cur->rhs.get());
  }
  return alphabet;
}

// Bottom-up elimination of the two primitive probabilistic operators.
FormulaRef eliminate_rec(const Smp& m, const Formula& f, std::size_t state_cap,
                         EliminationWitness* top_witness, bool is_top) {
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::Prop:
    case FormulaKind::ClockPred:
    case FormulaKind::Less:
    case FormulaKind::Succ:
    case FormulaKind::Member:
    case FormulaKind::AutomatonAtom:
      return std::make_shared<const Formula>(f);
    case FormulaKind::ExistsFirst:
      return f_exists_first(f.var, eliminate_rec(m, *f.lhs, state_cap, nullptr, false));
    case FormulaKind::ExistsSecond:
      return f_exists_second(f.var, eliminate_rec(m, *f.lhs, state_cap, nullptr, false));
    case FormulaKind::Not:
      return f_not(eliminate_rec(m, *f.lhs, state_cap, nullptr, false));
    case FormulaKind::Or:
      return f_or(eliminate_rec(m, *f.lhs, state_cap, nullptr, false),
                  eliminate_rec(m, *f.rhs, state_cap, nullptr, false));
    case FormulaKind::Prob: {
      FormulaRef body = eliminate_rec(m, *f.lhs, state_cap, nullptr, false);
      bool positive = f.rel == Rel::Gt;  // primitives are E P{>0} and E P{=1}
      BuchiAutomaton compiled = compile_wmlo(*body, engine_alphabet(*body, m));
      EliminationWitness* w = is_top ? top_witness : nullptr;
      BuchiAutomaton s = positive ? eliminate_positive(m, compiled, state_cap, w)
                                  : eliminate_almost_sure(m, compiled, state_cap, w);
      return f_automaton(std::make_shared<const BuchiAutomaton>(std::move(s)));
    }
  }
  fail(errc::unsupported, "unreachable");
}

}  // namespace

bool model_satisfies(const Smp& m, const Formula& g, std::vector<std::string>* counterexample) {
  FreeVariables fv = free_variables(g);
  if (!fv.first_order.empty() || !fv.second_order.empty())
    fail(errc::unsupported, "top-level formula must be closed");
  FormulaRef negated = f_not(std::make_shared<const Formula>(g));
  BuchiAutomaton neg = compile_wmlo(*negated, engine_alphabet(*negated, m));

  // Asymmetric product with the model's label language (all states accepting,
  // letters read off the source state).
  std::vector<int> prop_of_track(neg.alphabet.width(), -1);
  for (std::size_t i = 0; i < neg.alphabet.width(); ++i) {
    if (neg.alphabet.tracks[i].kind != TrackKind::Proposition)
      fail(errc::unsupported, "residual formula still reads variable tracks");
    prop_of_track[i] = m.prop_id(neg.alphabet.tracks[i].name);
  }
  auto letter_of = [&](int q) {
    Letter l = 0;
    for (std::size_t i = 0; i < neg.alphabet.width(); ++i)
      if (prop_of_track[i] >= 0 && m.has_label(q, prop_of_track[i])) l |= Letter(1) << i;
    return l;
  };

  struct Node {
    int model, aut;
  };
  std::map<std::pair<int, int>, int> ids;
  std::vector<Node> nodes;
  std::vector<std::vector<int>> succ;
  auto intern = [&](int q, int s) {
    auto [it, inserted] = ids.emplace(std::make_pair(q, s), static_cast<int>(ids.size()));
    if (inserted) {
      nodes.push_back({q, s});
      succ.emplace_back();
    }
    return it->second;
  };
  int start = intern(m.initial, neg.initial);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int q = nodes[i].model;
    int s_next = neg.step(nodes[i].aut, letter_of(q));
    for (const Smp::Transition& t : m.transitions)
      if (t.from == q) succ[i].push_back(intern(t.to, s_next));
    std::sort(succ[i].begin(), succ[i].end());
    succ[i].erase(std::unique(succ[i].begin(), succ[i].end()), succ[i].end());
  }
  (void)start;

  // A run of m matching the negated formula is a reachable cycle that is
  // accepting on the automaton side.
  std::size_t n = nodes.size();
  auto aut_accepting = [&](int node) { return neg.accepting[nodes[node].aut]; };

  // Tarjan on the product.
  std::vector<int> comp(n, -1), index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  int next_index = 0, comp_count = 0;
  struct Frame {
    int v;
    std::size_t child = 0;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> frames{{static_cast<int>(root)}};
    index[root] = low[root] = next_index++;
    stack.push_back(static_cast<int>(root));
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.child < succ[f.v].size()) {
        int w = succ[f.v][f.child++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = comp_count;
            if (w == f.v) break;
          }
          ++comp_count;
        }
        int v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  std::vector<int> comp_size(comp_count, 0);
  for (std::size_t v = 0; v < n; ++v) comp_size[comp[v]]++;

  auto nontrivial = [&](int v) {
    for (int w : succ[v])
      if (comp[w] == comp[v] && (comp_size[comp[v]] > 1 || w == v)) return true;
    return comp_size[comp[v]] > 1;
  };

  int bad_node = -1;
  if (neg.acceptance == Acceptance::Buchi) {
    for (std::size_t v = 0; v < n && bad_node < 0; ++v)
      if (aut_accepting(static_cast<int>(v)) && nontrivial(static_cast<int>(v)))
        bad_node = static_cast<int>(v);
  } else {
    // A cycle avoiding the rejecting rows, inside one SCC.
    std::vector<bool> keep(n, false);
    for (std::size_t v = 0; v < n; ++v) keep[v] = !aut_accepting(static_cast<int>(v));
    // Sub-SCC analysis: any edge v->w with both kept and same sub-component.
    std::map<int, std::vector<int>> by_comp;
    for (std::size_t v = 0; v < n; ++v)
      if (keep[v]) by_comp[comp[v]].push_back(static_cast<int>(v));
    for (auto& [c, members] : by_comp) {
      // Simple cycle detection in the induced subgraph.
      std::map<int, int> color;  // 0 white 1 grey 2 black
      std::function<bool(int)> dfs = [&](int v) {
        color[v] = 1;
        for (int w : succ[v]) {
          if (!keep[w] || comp[w] != comp[v]) continue;
          if (color[w] == 1) return true;
          if (color[w] == 0 && dfs(w)) return true;
        }
        color[v] = 2;
        return false;
      };
      for (int v : members)
        if (color[v] == 0 && dfs(v)) {
          bad_node = v;
          break;
        }
      if (bad_node >= 0) break;
    }
  }

  if (bad_node < 0) return true;
  if (counterexample) {
    // Breadth-first path from the initial node to the offending cycle entry.
    std::vector<int> parent(n, -2);
    std::vector<int> queue{0};
    parent[0] = -1;
    for (std::size_t i = 0; i < queue.size(); ++i)
      for (int w : succ[queue[i]])
        if (parent[w] == -2) {
          parent[w] = queue[i];
          queue.push_back(w);
        }
    std::vector<std::string> rev;
    for (int cur = bad_node; cur != -1; cur = parent[cur]) {
      if (cur == -2) break;
      rev.push_back(m.states[nodes[cur].model].name);
    }
    counterexample->assign(rev.rbegin(), rev.rend());
  }
  return false;
}

QualitativeResult check_qualitative(const Smp& m, const Formula& f, std::size_t state_cap) {
  FormulaClass cls = classify(f);
  if (cls != FormulaClass::ProbabilityFree && cls != FormulaClass::Qualitative)
    fail(errc::unsupported, "check_qualitative needs a probability-free or qualitative formula");
  FormulaRef sugar_free = desugar(f);

  QualitativeResult result;
  EliminationWitness top_witness;
  bool top_is_prob = sugar_free->kind == FormulaKind::Prob;
  FormulaRef residual =
      eliminate_rec(m, *sugar_free, state_cap, top_is_prob ? &top_witness : nullptr, true);

  std::vector<std::string> counterexample;
  result.verdict = model_satisfies(m, *residual, &counterexample);
  if (!result.verdict) result.counterexample_run = std::move(counterexample);
  if (result.verdict && top_is_prob) result.witness = std::move(top_witness);
  return result;
}

}  // namespace pmlo
