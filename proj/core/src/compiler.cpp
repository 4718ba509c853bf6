#include "pmlo/compiler.hpp"

#include <map>
#include <optional>

#include "pmlo/errors.hpp"

namespace pmlo {

namespace {

// Alpha-renames bound variables to fresh names so each binder owns a track.
FormulaRef alpha_rename(const Formula& f, std::map<std::string, std::string>& env, int& counter,
                        std::vector<std::pair<std::string, TrackKind>>& bound_tracks) {
  auto resolved = [&](const std::string& v) {
    auto it = env.find(v);
    return it == env.end() ? v : it->second;
  };
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::AutomatonAtom:
      return std::make_shared<const Formula>(f);
    case FormulaKind::Prop:
      return f_prop(f.name, resolved(f.var));
    case FormulaKind::ClockPred:
      return f_clock(f.clock, resolved(f.var));
    case FormulaKind::Less:
      return f_less(resolved(f.var), resolved(f.var2));
    case FormulaKind::Succ:
      return f_succ(resolved(f.var), resolved(f.var2));
    case FormulaKind::Member:
      return f_member(resolved(f.var), resolved(f.var2));
    case FormulaKind::ExistsFirst:
    case FormulaKind::ExistsSecond: {
      std::string fresh = f.var + "#" + std::to_string(counter++);
      bound_tracks.emplace_back(fresh, f.kind == FormulaKind::ExistsFirst
                                           ? TrackKind::FirstOrder
                                           : TrackKind::SecondOrder);
      auto saved = env.find(f.var) != env.end() ? std::optional<std::string>(env[f.var])
                                                : std::nullopt;
      env[f.var] = fresh;
      FormulaRef body = alpha_rename(*f.lhs, env, counter, bound_tracks);
      if (saved) env[f.var] = *saved; else env.erase(f.var);
      return f.kind == FormulaKind::ExistsFirst ? f_exists_first(fresh, body)
                                                : f_exists_second(fresh, body);
    }
    case FormulaKind::Not:
      return f_not(alpha_rename(*f.lhs, env, counter, bound_tracks));
    case FormulaKind::Or:
      return f_or(alpha_rename(*f.lhs, env, counter, bound_tracks),
                  alpha_rename(*f.rhs, env, counter, bound_tracks));
    case FormulaKind::Prob:
      fail(errc::unsupported, "cannot compile a probabilistic operator directly");
  }
  fail(errc::unsupported, "unreachable");
}

// B(t): wait for the position of t's 1 and check the proposition bit there.
BuchiAutomaton atom_position_check(const TrackAlphabet& alphabet, int check_track, int var_track,
                                   bool expect) {
  Letter vb = Letter(1) << var_track;
  Letter cb = Letter(1) << check_track;
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.initial = 0;
  a.edges.resize(3);
  a.edges[0] = {SymbolicEdge{vb, 0, 0},
                SymbolicEdge{vb | cb, vb | (expect ? cb : 0), 1},
                SymbolicEdge{vb | cb, vb | (expect ? 0 : cb), 2}};
  a.edges[1] = {SymbolicEdge{0, 0, 1}};
  a.edges[2] = {SymbolicEdge{0, 0, 2}};
  a.accepting = {false, true, false};
  a.weak = true;
  debug_validate(a);
  return a;
}

BuchiAutomaton atom_less(const TrackAlphabet& alphabet, int t_track, int t2_track) {
  Letter tb = Letter(1) << t_track;
  Letter ub = Letter(1) << t2_track;
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.initial = 0;
  a.edges.resize(4);  // 0 wait, 1 pending, 2 yes, 3 no
  a.edges[0] = {SymbolicEdge{tb | ub, 0, 0}, SymbolicEdge{tb | ub, tb, 1},
                SymbolicEdge{ub, ub, 3}};
  a.edges[1] = {SymbolicEdge{ub, 0, 1}, SymbolicEdge{ub, ub, 2}};
  a.edges[2] = {SymbolicEdge{0, 0, 2}};
  a.edges[3] = {SymbolicEdge{0, 0, 3}};
  a.accepting = {false, false, true, false};
  a.weak = true;
  debug_validate(a);
  return a;
}

BuchiAutomaton atom_succ(const TrackAlphabet& alphabet, int t_track, int t2_track) {
  Letter tb = Letter(1) << t_track;
  Letter ub = Letter(1) << t2_track;
  BuchiAutomaton a;
  a.alphabet = alphabet;
  a.initial = 0;
  a.edges.resize(4);  // 0 wait, 1 t-just-seen, 2 yes, 3 no
  a.edges[0] = {SymbolicEdge{tb | ub, 0, 0}, SymbolicEdge{tb | ub, tb, 1},
                SymbolicEdge{ub, ub, 3}};
  a.edges[1] = {SymbolicEdge{ub, ub, 2}, SymbolicEdge{ub, 0, 3}};
  a.edges[2] = {SymbolicEdge{0, 0, 2}};
  a.edges[3] = {SymbolicEdge{0, 0, 3}};
  a.accepting = {false, false, true, false};
  a.weak = true;
  debug_validate(a);
  return a;
}

BuchiAutomaton compile_rec(const Formula& f, const TrackAlphabet& alphabet) {
  auto track = [&](const std::string& name) {
    int idx = alphabet.index_of(name);
    if (idx < 0) fail(errc::alphabet_mismatch, "no track for '" + name + "'");
    return idx;
  };
  switch (f.kind) {
    case FormulaKind::True:
      return universal_automaton(alphabet);
    case FormulaKind::Prop:
      return atom_position_check(alphabet, track(f.name), track(f.var), true);
    case FormulaKind::ClockPred:
      return atom_position_check(alphabet, track(f.clock.symbol()), track(f.var), true);
    case FormulaKind::Less:
      return atom_less(alphabet, track(f.var), track(f.var2));
    case FormulaKind::Succ:
      return atom_succ(alphabet, track(f.var), track(f.var2));
    case FormulaKind::Member:
      return atom_position_check(alphabet, track(f.var2), track(f.var), true);
    case FormulaKind::Not:
      return complement_weak(compile_rec(*f.lhs, alphabet));
    case FormulaKind::Or:
      return unite(compile_rec(*f.lhs, alphabet), compile_rec(*f.rhs, alphabet));
    case FormulaKind::ExistsFirst:
    case FormulaKind::ExistsSecond:
      return project_and_determinize(compile_rec(*f.lhs, alphabet), f.var);
    case FormulaKind::AutomatonAtom:
      return pad_alphabet(*f.automaton, alphabet);
    case FormulaKind::Prob:
      fail(errc::unsupported, "probabilistic operator inside a compiled body");
  }
  fail(errc::unsupported, "unreachable");
}

}  // namespace

TrackAlphabet formula_alphabet(const Formula& f) {
  TrackAlphabet alphabet;
  for (const std::string& symbol : atom_symbols(f))
    alphabet.tracks.push_back({symbol, TrackKind::Proposition});
  FreeVariables fv = free_variables(f);
  for (const std::string& v : fv.first_order)
    alphabet.tracks.push_back({v, TrackKind::FirstOrder});
  for (const std::string& v : fv.second_order)
    alphabet.tracks.push_back({v, TrackKind::SecondOrder});
  return alphabet;
}

BuchiAutomaton compile_wmlo(const Formula& f, const TrackAlphabet& tracks) {
  std::map<std::string, std::string> env;
  std::vector<std::pair<std::string, TrackKind>> bound;
  int counter = 0;
  FormulaRef renamed = alpha_rename(f, env, counter, bound);

  TrackAlphabet extended = tracks;
  for (const auto& [name, kind] : bound) extended.tracks.push_back({name, kind});
  if (extended.width() > 60)
    fail(errc::state_blowup, "formula needs more than 60 tracks");

  BuchiAutomaton compiled = compile_rec(*renamed, extended);
  BuchiAutomaton out = restrict_alphabet(trim(compiled), tracks);
  out = weak_normalize(std::move(out));
  debug_validate(out);
  return out;
}

}  // namespace pmlo
