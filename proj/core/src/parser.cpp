#include "pmlo/parser.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <vector>

#include "pmlo/errors.hpp"

namespace pmlo {

namespace {

enum class Tok {
  Ident, Int, LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Dot, Pipe, Amp, Bang, Arrow, Lt, Le, Eq, Ne, Ge, Gt, At, PlusAt,
  Minus, Plus, Slash, End
};

struct Token {
  Tok kind;
  std::string text;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void error(const std::string& msg) const {
    fail(errc::syntax, "line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') { ++line; col = 1; } else { ++col; }
    }
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '#') {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) { advance(); continue; }
      Token t{Tok::End, "", line, col};
      auto two = src.substr(pos, 2);
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' ||
                src[pos] == '\''))
          advance();
        t.kind = Tok::Ident;
        t.text = src.substr(start, pos - start);
        out.push_back(t);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t start = pos;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) advance();
        t.kind = Tok::Int;
        t.text = src.substr(start, pos - start);
        out.push_back(t);
        continue;
      }
      if (two == "->") { t.kind = Tok::Arrow; advance(2); }
      else if (two == "<=") { t.kind = Tok::Le; advance(2); }
      else if (two == ">=") { t.kind = Tok::Ge; advance(2); }
      else if (two == "!=") { t.kind = Tok::Ne; advance(2); }
      else if (two == "+@") { t.kind = Tok::PlusAt; advance(2); }
      else switch (c) {
        case '(': t.kind = Tok::LParen; advance(); break;
        case ')': t.kind = Tok::RParen; advance(); break;
        case '{': t.kind = Tok::LBrace; advance(); break;
        case '}': t.kind = Tok::RBrace; advance(); break;
        case '[': t.kind = Tok::LBracket; advance(); break;
        case ']': t.kind = Tok::RBracket; advance(); break;
        case '.': t.kind = Tok::Dot; advance(); break;
        case '|': t.kind = Tok::Pipe; advance(); break;
        case '&': t.kind = Tok::Amp; advance(); break;
        case '!': t.kind = Tok::Bang; advance(); break;
        case '<': t.kind = Tok::Lt; advance(); break;
        case '>': t.kind = Tok::Gt; advance(); break;
        case '=': t.kind = Tok::Eq; advance(); break;
        case '@': t.kind = Tok::At; advance(); break;
        case '-': t.kind = Tok::Minus; advance(); break;
        case '+': t.kind = Tok::Plus; advance(); break;
        case '/': t.kind = Tok::Slash; advance(); break;
        default: error(std::string("unexpected character '") + c + "'");
      }
      out.push_back(t);
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t at = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t i = at + ahead;
    return toks[i < toks.size() ? i : toks.size() - 1];
  }
  Token take() { return toks[at < toks.size() - 1 ? at++ : at]; }

  [[noreturn]] void error(const Token& t, const std::string& msg) const {
    fail(errc::syntax,
         "line " + std::to_string(t.line) + ":" + std::to_string(t.col) + ": " + msg);
  }

  bool accept(Tok k) {
    if (peek().kind == k) { take(); return true; }
    return false;
  }
  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k) error(peek(), "expected " + what);
    return take();
  }

  static std::optional<Rel> rel_of(Tok k) {
    switch (k) {
      case Tok::Lt: return Rel::Lt;
      case Tok::Le: return Rel::Le;
      case Tok::Eq: return Rel::Eq;
      case Tok::Ne: return Rel::Ne;
      case Tok::Ge: return Rel::Ge;
      case Tok::Gt: return Rel::Gt;
      default: return std::nullopt;
    }
  }

  // stop_at_pipe: inside E P{..}[ .. | .. ] the top-level '|' separates the
  // condition; parenthesize a disjunction there.
  FormulaRef parse_implies(bool stop_at_pipe) {
    FormulaRef lhs = parse_or(stop_at_pipe);
    if (accept(Tok::Arrow)) {
      FormulaRef rhs = parse_implies(stop_at_pipe);
      return f_or(f_not(lhs), rhs);
    }
    return lhs;
  }

  FormulaRef parse_or(bool stop_at_pipe) {
    FormulaRef lhs = parse_and(stop_at_pipe);
    while (!stop_at_pipe && peek().kind == Tok::Pipe) {
      take();
      lhs = f_or(lhs, parse_and(stop_at_pipe));
    }
    return lhs;
  }

  FormulaRef parse_and(bool stop_at_pipe) {
    FormulaRef lhs = parse_prefix(stop_at_pipe);
    while (peek().kind == Tok::Amp) {
      take();
      lhs = f_and(lhs, parse_prefix(stop_at_pipe));
    }
    return lhs;
  }

  FormulaRef parse_prefix(bool stop_at_pipe) {
    if (accept(Tok::Bang)) return f_not(parse_prefix(stop_at_pipe));
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      const std::string& w = t.text;
      if (w == "exists" || w == "forall" || w == "existsS" || w == "forallS") {
        take();
        Token v = expect(Tok::Ident, "variable name");
        expect(Tok::Dot, "'.'");
        FormulaRef body = parse_implies(stop_at_pipe);
        bool second = (w == "existsS" || w == "forallS");
        FormulaRef ex = second ? f_exists_second(v.text, body) : f_exists_first(v.text, body);
        if (w == "forall" || w == "forallS")
          return f_not(second ? f_exists_second(v.text, f_not(body))
                              : f_exists_first(v.text, f_not(body)));
        return ex;
      }
      if ((w == "E" || w == "A") && peek(1).kind == Tok::Ident && peek(1).text == "P" &&
          peek(2).kind == Tok::LBrace)
        return parse_prob(w == "A");
    }
    return parse_atom(stop_at_pipe);
  }

  Rational parse_probability() {
    Token n = expect(Tok::Int, "probability numerator");
    std::string text = n.text;
    if (accept(Tok::Slash)) {
      Token d = expect(Tok::Int, "probability denominator");
      text += "/" + d.text;
    }
    Rational p = parse_rational(text);
    if (p < 0 || p > 1) error(n, "probability threshold outside [0,1]");
    return p;
  }

  FormulaRef parse_prob(bool universal) {
    Token start = take();  // E or A
    take();                // P
    expect(Tok::LBrace, "'{'");
    auto rel = rel_of(peek().kind);
    if (!rel) error(peek(), "expected comparison relation");
    take();
    Rational p = parse_probability();
    expect(Tok::RBrace, "'}'");
    expect(Tok::LBracket, "'['");
    FormulaRef body = parse_implies(/*stop_at_pipe=*/true);
    FormulaRef condition;
    bool conditional = false;
    if (accept(Tok::Pipe)) {
      conditional = true;
      condition = parse_implies(/*stop_at_pipe=*/false);
    }
    expect(Tok::RBracket, "']'");
    (void)start;
    return f_prob(*rel, p, body, condition, universal, conditional);
  }

  std::int64_t parse_clock_constant() {
    Token n = expect(Tok::Int, "clock constant");
    std::int64_t c = std::stoll(n.text);
    return c;
  }

  FormulaRef parse_atom(bool stop_at_pipe) {
    if (accept(Tok::LParen)) {
      FormulaRef inner = parse_implies(/*stop_at_pipe=*/false);
      expect(Tok::RParen, "')'");
      return inner;
    }
    Token t = expect(Tok::Ident, "atom");
    if (t.text == "true") return f_true();
    if (t.text == "false") return f_false();

    if (accept(Tok::LParen)) {  // B(t)
      Token v = expect(Tok::Ident, "variable");
      expect(Tok::RParen, "')'");
      return f_prop(t.text, v.text);
    }
    if (peek().kind == Tok::Ident && peek().text == "in") {  // t in X
      take();
      Token x = expect(Tok::Ident, "set variable");
      return f_member(t.text, x.text);
    }
    if (peek().kind == Tok::Lt && peek(1).kind == Tok::Ident) {  // t < t'
      take();
      Token v = expect(Tok::Ident, "variable");
      return f_less(t.text, v.text);
    }
    if (peek().kind == Tok::At || peek().kind == Tok::PlusAt) {  // clock predicates
      bool plus = take().kind == Tok::PlusAt;
      Token step = expect(Tok::Ident, "step variable");
      ClockAtom atom;
      atom.x = t.text;
      atom.kind = plus ? ClockAtom::Kind::Plus : ClockAtom::Kind::Value;
      if (!plus && peek().kind == Tok::Minus) {
        take();
        Token y = expect(Tok::Ident, "clock name");
        expect(Tok::At, "'@'");
        Token step2 = expect(Tok::Ident, "step variable");
        if (step2.text != step.text)
          fail(errc::l_diff,
               "line " + std::to_string(step2.line) + ":" + std::to_string(step2.col) +
                   ": cross-step clock predicate '" + t.text + "@" + step.text + " - " + y.text +
                   "@" + step2.text + "' is undecidable");
        atom.kind = ClockAtom::Kind::Diff;
        atom.y = y.text;
      }
      auto rel = rel_of(peek().kind);
      if (!rel) error(peek(), "expected comparison relation after clock reference");
      take();
      atom.rel = *rel;
      atom.constant = parse_clock_constant();
      if (atom.constant < 0) error(t, "clock predicate constants are naturals");
      return f_clock(atom, step.text);
    }
    error(t, "cannot parse atom starting at '" + t.text + "'");
  }
};

enum class Sort { First, Second };

void scope_check(const Formula& f, std::map<std::string, Sort>& env,
                 std::map<std::string, Sort>& free) {
  auto use = [&](const std::string& v, Sort s) {
    auto it = env.find(v);
    if (it != env.end()) {
      if (it->second != s) fail(errc::scope, "variable '" + v + "' used with the wrong sort");
      return;
    }
    auto [fit, inserted] = free.emplace(v, s);
    if (!inserted && fit->second != s)
      fail(errc::scope, "free variable '" + v + "' used with inconsistent sorts");
  };
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::AutomatonAtom:
      return;
    case FormulaKind::Prop:
    case FormulaKind::ClockPred:
      use(f.var, Sort::First);
      return;
    case FormulaKind::Less:
    case FormulaKind::Succ:
      use(f.var, Sort::First);
      use(f.var2, Sort::First);
      return;
    case FormulaKind::Member:
      use(f.var, Sort::First);
      use(f.var2, Sort::Second);
      return;
    case FormulaKind::ExistsFirst:
    case FormulaKind::ExistsSecond: {
      auto sort = f.kind == FormulaKind::ExistsFirst ? Sort::First : Sort::Second;
      auto old = env.find(f.var);
      std::optional<Sort> saved;
      if (old != env.end()) saved = old->second;
      env[f.var] = sort;
      scope_check(*f.lhs, env, free);
      if (saved) env[f.var] = *saved; else env.erase(f.var);
      return;
    }
    case FormulaKind::Not:
      scope_check(*f.lhs, env, free);
      return;
    case FormulaKind::Or:
    case FormulaKind::Prob:
      scope_check(*f.lhs, env, free);
      scope_check(*f.rhs, env, free);
      return;
  }
}

}  // namespace

FormulaRef parse_formula(const std::string& text) {
  Lexer lexer(text);
  Parser parser{lexer.run()};
  FormulaRef f = parser.parse_implies(/*stop_at_pipe=*/false);
  if (parser.peek().kind != Tok::End)
    parser.error(parser.peek(), "trailing input after formula");
  std::map<std::string, Sort> env, free;
  scope_check(*f, env, free);
  return f;
}

}  // namespace pmlo
