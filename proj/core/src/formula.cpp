#include "pmlo/formula.hpp"

#include <algorithm>
#include <sstream>

#include "pmlo/errors.hpp"

namespace pmlo {

std::string ClockAtom::symbol() const {
  std::ostringstream out;
  out << "cp:" << x;
  if (kind == Kind::Diff) out << "-" << y;
  if (kind == Kind::Plus) out << "+";
  out << rel_token(rel) << constant;
  return out.str();
}

namespace {
FormulaRef make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
}  // namespace

FormulaRef f_true() {
  Formula f;
  f.kind = FormulaKind::True;
  return make(std::move(f));
}

FormulaRef f_false() { return f_not(f_true()); }

FormulaRef f_prop(std::string name, std::string var) {
  Formula f;
  f.kind = FormulaKind::Prop;
  f.name = std::move(name);
  f.var = std::move(var);
  return make(std::move(f));
}

FormulaRef f_clock(ClockAtom atom, std::string var) {
  Formula f;
  f.kind = FormulaKind::ClockPred;
  f.clock = std::move(atom);
  f.var = std::move(var);
  return make(std::move(f));
}

FormulaRef f_less(std::string t, std::string t2) {
  Formula f;
  f.kind = FormulaKind::Less;
  f.var = std::move(t);
  f.var2 = std::move(t2);
  return make(std::move(f));
}

FormulaRef f_succ(std::string t, std::string t2) {
  Formula f;
  f.kind = FormulaKind::Succ;
  f.var = std::move(t);
  f.var2 = std::move(t2);
  return make(std::move(f));
}

FormulaRef f_member(std::string t, std::string x) {
  Formula f;
  f.kind = FormulaKind::Member;
  f.var = std::move(t);
  f.var2 = std::move(x);
  return make(std::move(f));
}

FormulaRef f_exists_first(std::string t, FormulaRef body) {
  Formula f;
  f.kind = FormulaKind::ExistsFirst;
  f.var = std::move(t);
  f.lhs = std::move(body);
  return make(std::move(f));
}

FormulaRef f_exists_second(std::string x, FormulaRef body) {
  Formula f;
  f.kind = FormulaKind::ExistsSecond;
  f.var = std::move(x);
  f.lhs = std::move(body);
  return make(std::move(f));
}

FormulaRef f_not(FormulaRef body) {
  Formula f;
  f.kind = FormulaKind::Not;
  f.lhs = std::move(body);
  return make(std::move(f));
}

FormulaRef f_or(FormulaRef lhs, FormulaRef rhs) {
  Formula f;
  f.kind = FormulaKind::Or;
  f.lhs = std::move(lhs);
  f.rhs = std::move(rhs);
  return make(std::move(f));
}

FormulaRef f_and(FormulaRef lhs, FormulaRef rhs) {
  return f_not(f_or(f_not(std::move(lhs)), f_not(std::move(rhs))));
}

FormulaRef f_prob(Rel rel, Rational threshold, FormulaRef body, FormulaRef condition,
                  bool universal, bool conditional) {
  if (threshold < 0 || threshold > 1)
    fail(errc::syntax, "probability threshold outside [0,1]: " + rational_string(threshold));
  Formula f;
  f.kind = FormulaKind::Prob;
  f.rel = rel;
  f.threshold = std::move(threshold);
  f.universal = universal;
  f.conditional = conditional;
  f.lhs = std::move(body);
  f.rhs = condition ? std::move(condition) : f_true();
  return make(std::move(f));
}

FormulaRef f_automaton(std::shared_ptr<const BuchiAutomaton> automaton) {
  Formula f;
  f.kind = FormulaKind::AutomatonAtom;
  f.automaton = std::move(automaton);
  return make(std::move(f));
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case FormulaKind::True: return true;
    case FormulaKind::Prop: return a.name == b.name && a.var == b.var;
    case FormulaKind::ClockPred:
      return a.var == b.var && a.clock.kind == b.clock.kind && a.clock.x == b.clock.x &&
             a.clock.y == b.clock.y && a.clock.rel == b.clock.rel &&
             a.clock.constant == b.clock.constant;
    case FormulaKind::Less:
    case FormulaKind::Succ:
    case FormulaKind::Member:
      return a.var == b.var && a.var2 == b.var2;
    case FormulaKind::ExistsFirst:
    case FormulaKind::ExistsSecond:
      return a.var == b.var && structurally_equal(*a.lhs, *b.lhs);
    case FormulaKind::Not: return structurally_equal(*a.lhs, *b.lhs);
    case FormulaKind::Or:
      return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    case FormulaKind::Prob:
      return a.rel == b.rel && a.threshold == b.threshold && a.universal == b.universal &&
             a.conditional == b.conditional && structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
    case FormulaKind::AutomatonAtom: return a.automaton == b.automaton;
  }
  return false;
}

namespace {

void print_rec(const Formula& f, std::ostream& out) {
  switch (f.kind) {
    case FormulaKind::True:
      out << "true";
      return;
    case FormulaKind::Prop:
      out << f.name << "(" << f.var << ")";
      return;
    case FormulaKind::ClockPred:
      out << f.clock.x;
      if (f.clock.kind == ClockAtom::Kind::Plus) out << "+";
      out << "@" << f.var;
      if (f.clock.kind == ClockAtom::Kind::Diff) out << " - " << f.clock.y << "@" << f.var;
      out << " " << rel_token(f.clock.rel) << " " << f.clock.constant;
      return;
    case FormulaKind::Less:
      out << f.var << " < " << f.var2;
      return;
    case FormulaKind::Succ:
      out << f.var2 << " = " << f.var << " + 1";
      return;
    case FormulaKind::Member:
      out << f.var << " in " << f.var2;
      return;
    case FormulaKind::ExistsFirst:
      out << "exists " << f.var << ". ";
      print_rec(*f.lhs, out);
      return;
    case FormulaKind::ExistsSecond:
      out << "existsS " << f.var << ". ";
      print_rec(*f.lhs, out);
      return;
    case FormulaKind::Not:
      if (f.lhs->kind == FormulaKind::True) {
        out << "false";
        return;
      }
      out << "!(";
      print_rec(*f.lhs, out);
      out << ")";
      return;
    case FormulaKind::Or:
      out << "(";
      print_rec(*f.lhs, out);
      out << " | ";
      print_rec(*f.rhs, out);
      out << ")";
      return;
    case FormulaKind::Prob:
      out << (f.universal ? "A" : "E") << " P{" << rel_token(f.rel) << " "
          << rational_string(f.threshold) << "}[ ";
      print_rec(*f.lhs, out);
      if (f.conditional) {
        out << " | ";
        print_rec(*f.rhs, out);
      }
      out << " ]";
      return;
    case FormulaKind::AutomatonAtom:
      out << "<automaton>";
      return;
  }
}

void walk_free(const Formula& f, std::vector<std::string>& bound, FreeVariables& acc,
               std::map<std::string, bool>& seen_first, std::map<std::string, bool>& seen_second) {
  auto is_bound = [&](const std::string& v) {
    return std::find(bound.begin(), bound.end(), v) != bound.end();
  };
  auto touch_first = [&](const std::string& v) {
    if (!is_bound(v) && !seen_first.count(v)) {
      seen_first[v] = true;
      acc.first_order.push_back(v);
    }
  };
  auto touch_second = [&](const std::string& v) {
    if (!is_bound(v) && !seen_second.count(v)) {
      seen_second[v] = true;
      acc.second_order.push_back(v);
    }
  };
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::AutomatonAtom:
      return;
    case FormulaKind::Prop:
    case FormulaKind::ClockPred:
      touch_first(f.var);
      return;
    case FormulaKind::Less:
    case FormulaKind::Succ:
      touch_first(f.var);
      touch_first(f.var2);
      return;
    case FormulaKind::Member:
      touch_first(f.var);
      touch_second(f.var2);
      return;
    case FormulaKind::ExistsFirst:
    case FormulaKind::ExistsSecond:
      bound.push_back(f.var);
      walk_free(*f.lhs, bound, acc, seen_first, seen_second);
      bound.pop_back();
      return;
    case FormulaKind::Not:
      walk_free(*f.lhs, bound, acc, seen_first, seen_second);
      return;
    case FormulaKind::Or:
    case FormulaKind::Prob:
      walk_free(*f.lhs, bound, acc, seen_first, seen_second);
      walk_free(*f.rhs, bound, acc, seen_first, seen_second);
      return;
  }
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::ostringstream out;
  print_rec(f, out);
  return out.str();
}

FreeVariables free_variables(const Formula& f) {
  FreeVariables acc;
  std::vector<std::string> bound;
  std::map<std::string, bool> s1, s2;
  walk_free(f, bound, acc, s1, s2);
  return acc;
}

std::set<std::string> atom_symbols(const Formula& f) {
  std::set<std::string> out;
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* cur = stack.back();
    stack.pop_back();
    if (cur->kind == FormulaKind::Prop) out.insert(cur->name);
    if (cur->kind == FormulaKind::ClockPred) out.insert(cur->clock.symbol());
    if (cur->lhs) stack.push_back(cur->lhs.get());
    if (cur->rhs) stack.push_back(cur->rhs.get());
  }
  return out;
}

std::vector<ClockAtom> clock_atoms(const Formula& f) {
  std::vector<ClockAtom> out;
  std::set<std::string> seen;
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* cur = stack.back();
    stack.pop_back();
    if (cur->kind == FormulaKind::ClockPred && seen.insert(cur->clock.symbol()).second)
      out.push_back(cur->clock);
    if (cur->lhs) stack.push_back(cur->lhs.get());
    if (cur->rhs) stack.push_back(cur->rhs.get());
  }
  return out;
}

}  // namespace pmlo
