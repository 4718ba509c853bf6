#include "pmlo/logic.hpp"

#include <algorithm>
#include <optional>

#include "pmlo/errors.hpp"

namespace pmlo {

namespace {

void collect_prob_nodes(const Formula& f, std::vector<const Formula*>& out) {
  if (f.kind == FormulaKind::Prob) out.push_back(&f);
  if (f.lhs) collect_prob_nodes(*f.lhs, out);
  if (f.rhs) collect_prob_nodes(*f.rhs, out);
}

bool contains_prob(const Formula& f) {
  if (f.kind == FormulaKind::Prob) return true;
  return (f.lhs && contains_prob(*f.lhs)) || (f.rhs && contains_prob(*f.rhs));
}

}  // namespace

FormulaClass classify(const Formula& f) {
  std::vector<const Formula*> nodes;
  collect_prob_nodes(f, nodes);
  if (nodes.empty()) return FormulaClass::ProbabilityFree;
  bool qualitative = std::all_of(nodes.begin(), nodes.end(), [](const Formula* n) {
    return n->threshold == 0 || n->threshold == 1;
  });
  if (qualitative) return FormulaClass::Qualitative;
  bool flat = std::all_of(nodes.begin(), nodes.end(), [](const Formula* n) {
    if (contains_prob(*n->lhs) || contains_prob(*n->rhs)) return false;
    FreeVariables fv = free_variables(*n);
    return fv.first_order.empty() && fv.second_order.empty();
  });
  return flat ? FormulaClass::FlatQuantitative : FormulaClass::Unsupported;
}

namespace {

FormulaRef prim_positive(FormulaRef body) {
  return f_prob(Rel::Gt, Rational(0), std::move(body), nullptr);
}
FormulaRef prim_almost_sure(FormulaRef body) {
  return f_prob(Rel::Eq, Rational(1), std::move(body), nullptr);
}

FormulaRef desugar_prob(Rel rel, const Rational& p, bool conditional, FormulaRef body,
                        FormulaRef condition) {
  if (p == 0) {
    // E P{~0}[phi1 | phi2] is equivalent to E P{~0}[phi1 & phi2].
    FormulaRef psi = conditional ? f_and(body, condition) : body;
    switch (rel) {
      case Rel::Ge: return f_true();
      case Rel::Lt: return f_false();
      case Rel::Le:
      case Rel::Eq: return prim_almost_sure(f_not(psi));
      case Rel::Ne:
      case Rel::Gt: return prim_positive(psi);
    }
  }
  if (p == 1) {
    if (!conditional) {
      switch (rel) {
        case Rel::Le: return f_true();
        case Rel::Gt: return f_false();
        case Rel::Ge:
        case Rel::Eq: return prim_almost_sure(body);
        case Rel::Lt:
        case Rel::Ne: return prim_positive(f_not(body));
      }
    }
    // Conditional with p = 1: with m1 = mu(phi1 & phi2) and m2 = mu(phi2),
    // m1 <= m2 always, and m1 = m2 iff mu(phi2 & !phi1) = 0.
    FormulaRef leak = f_and(condition, f_not(body));
    switch (rel) {
      case Rel::Le: return f_true();
      case Rel::Gt: return f_false();
      case Rel::Ge:
      case Rel::Eq: return prim_almost_sure(f_not(leak));
      case Rel::Lt:
      case Rel::Ne: return prim_positive(leak);
    }
  }
  fail(errc::unsupported_reduction,
       "no qualitative reduction for threshold " + rational_string(p));
}

}  // namespace

FormulaRef desugar(const Formula& f) {
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
      return f_exists_first(f.var, desugar(*f.lhs));
    case FormulaKind::ExistsSecond:
      return f_exists_second(f.var, desugar(*f.lhs));
    case FormulaKind::Not:
      return f_not(desugar(*f.lhs));
    case FormulaKind::Or:
      return f_or(desugar(*f.lhs), desugar(*f.rhs));
    case FormulaKind::Prob: {
      FormulaRef body = desugar(*f.lhs);
      FormulaRef condition = desugar(*f.rhs);
      // A P{~p} over all adversaries is the negated existential dual.
      if (f.universal) {
        Rel dual = rel_complement(f.rel);
        if (f.threshold == 0 || f.threshold == 1)
          return f_not(desugar_prob(dual, f.threshold, f.conditional, body, condition));
        return f_not(f_prob(dual, f.threshold, body, condition, false, f.conditional));
      }
      if (f.threshold == 0 || f.threshold == 1)
        return desugar_prob(f.rel, f.threshold, f.conditional, body, condition);
      return f_prob(f.rel, f.threshold, body, condition, false, f.conditional);
    }
  }
  fail(errc::unsupported, "unreachable formula kind");
}

std::size_t BoundedWord::stem_length() const {
  std::size_t n = 0;
  for (const auto& [name, bits] : tracks) n = std::max(n, bits.size());
  return n;
}

bool BoundedWord::holds(const std::string& prop, std::uint64_t position) const {
  auto it = tracks.find(prop);
  if (it == tracks.end()) return false;
  return position < it->second.size() && it->second[position];
}

namespace {

bool eval_rec(const Formula& f, const BoundedWord& word, Valuation& v, std::size_t window) {
  auto first = [&](const std::string& name) -> std::uint64_t {
    auto it = v.first_order.find(name);
    if (it == v.first_order.end()) fail(errc::scope, "unbound variable '" + name + "'");
    return it->second;
  };
  switch (f.kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::Prop:
      return word.holds(f.name, first(f.var));
    case FormulaKind::ClockPred:
      return word.holds(f.clock.symbol(), first(f.var));
    case FormulaKind::Less:
      return first(f.var) < first(f.var2);
    case FormulaKind::Succ:
      return first(f.var2) == first(f.var) + 1;
    case FormulaKind::Member: {
      auto it = v.second_order.find(f.var2);
      if (it == v.second_order.end()) fail(errc::scope, "unbound set variable '" + f.var2 + "'");
      return it->second.count(first(f.var)) != 0;
    }
    case FormulaKind::ExistsFirst: {
      auto saved = v.first_order.find(f.var) != v.first_order.end()
                       ? std::optional<std::uint64_t>(v.first_order[f.var])
                       : std::nullopt;
      bool result = false;
      for (std::uint64_t n = 0; n <= window && !result; ++n) {
        v.first_order[f.var] = n;
        result = eval_rec(*f.lhs, word, v, window);
      }
      if (saved) v.first_order[f.var] = *saved; else v.first_order.erase(f.var);
      return result;
    }
    case FormulaKind::ExistsSecond: {
      if (window + 1 > 20) fail(errc::state_blowup, "bounded evaluation window too wide");
      auto saved = v.second_order.find(f.var) != v.second_order.end()
                       ? std::optional<std::set<std::uint64_t>>(v.second_order[f.var])
                       : std::nullopt;
      bool result = false;
      for (std::uint64_t mask = 0; mask < (1ull << (window + 1)) && !result; ++mask) {
        std::set<std::uint64_t> s;
        for (std::uint64_t i = 0; i <= window; ++i)
          if (mask & (1ull << i)) s.insert(i);
        v.second_order[f.var] = std::move(s);
        result = eval_rec(*f.lhs, word, v, window);
      }
      if (saved) v.second_order[f.var] = *saved; else v.second_order.erase(f.var);
      return result;
    }
    case FormulaKind::Not:
      return !eval_rec(*f.lhs, word, v, window);
    case FormulaKind::Or:
      return eval_rec(*f.lhs, word, v, window) || eval_rec(*f.rhs, word, v, window);
    case FormulaKind::Prob:
    case FormulaKind::AutomatonAtom:
      fail(errc::unsupported, "bounded evaluator handles probability-free formulas only");
  }
  return false;
}

}  // namespace

bool evaluate_wmlo_bounded(const Formula& f, const BoundedWord& word, const Valuation& v) {
  std::size_t window = word.stem_length();
  for (const auto& [name, n] : v.first_order) window = std::max<std::size_t>(window, n);
  for (const auto& [name, s] : v.second_order)
    if (!s.empty()) window = std::max<std::size_t>(window, *s.rbegin());
  Valuation scratch = v;
  return eval_rec(f, word, scratch, window);
}

}  // namespace pmlo
