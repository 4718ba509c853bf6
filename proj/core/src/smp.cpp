#include "pmlo/smp.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "pmlo/errors.hpp"

namespace pmlo {

int Smp::symbol_id(const std::string& name) const {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == name) return static_cast<int>(i);
  return -1;
}

int Smp::prop_id(const std::string& name) const {
  for (std::size_t i = 0; i < props.size(); ++i)
    if (props[i] == name) return static_cast<int>(i);
  return -1;
}

int Smp::state_id(const std::string& name) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == name) return static_cast<int>(i);
  return -1;
}

bool Smp::has_label(int state, int prop) const {
  const auto& l = states[state].labels;
  return std::binary_search(l.begin(), l.end(), prop);
}

const std::vector<int>& Smp::group(int state, int symbol) const {
  return group_index[state][symbol];
}

std::vector<int> Smp::enabled_symbols(int state) const {
  std::vector<int> out;
  for (std::size_t a = 0; a < symbols.size(); ++a)
    if (!group_index[state][a].empty()) out.push_back(static_cast<int>(a));
  return out;
}

void Smp::rebuild_index() {
  group_index.assign(states.size(), std::vector<std::vector<int>>(symbols.size()));
  for (std::size_t i = 0; i < transitions.size(); ++i)
    group_index[transitions[i].from][transitions[i].symbol].push_back(static_cast<int>(i));
}

void Smp::validate() const {
  for (const Transition& t : transitions) {
    if (t.prob == 0)
      fail(errc::zero_prob, "transition " + states[t.from].name + " -" + symbols[t.symbol] +
                                "-> " + states[t.to].name + " has probability 0");
    if (t.prob < 0 || t.prob > 1)
      fail(errc::bad_model, "transition probability outside (0,1]");
  }
  for (std::size_t q = 0; q < states.size(); ++q) {
    bool any = false;
    for (std::size_t a = 0; a < symbols.size(); ++a) {
      const auto& g = group_index[q][a];
      if (g.empty()) continue;
      any = true;
      Rational sum = 0;
      for (int id : g) sum += transitions[id].prob;
      if (sum != 1)
        fail(errc::prob_sum, "group (" + states[q].name + ", " + symbols[a] + ") sums to " +
                                 rational_string(sum) + ", expected 1");
    }
    if (!any)
      fail(errc::dead_end, "state " + states[q].name +
                               " has no outgoing transitions; add an explicit self-loop");
  }
}

bool Smp::is_markov_process() const {
  for (std::size_t q = 0; q < states.size(); ++q)
    if (enabled_symbols(static_cast<int>(q)).size() > 1) return false;
  return true;
}

FiniteRun FiniteRun::prefix(std::size_t k) const {
  FiniteRun out;
  out.states.assign(states.begin(), states.begin() + k + 1);
  out.symbols.assign(symbols.begin(), symbols.begin() + k);
  return out;
}

bool FiniteRun::is_prefix_of(const FiniteRun& other) const {
  if (length() > other.length()) return false;
  return std::equal(states.begin(), states.end(), other.states.begin()) &&
         std::equal(symbols.begin(), symbols.end(), other.symbols.begin());
}

namespace {

struct LineReader {
  std::istringstream in;
  std::string line;
  int number = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  bool next() {
    while (std::getline(in, line)) {
      ++number;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
      while (!line.empty() && is_space(line.back())) line.pop_back();
      std::size_t start = 0;
      while (start < line.size() && is_space(line[start])) ++start;
      line.erase(0, start);
      if (!line.empty()) return true;
    }
    return false;
  }
};

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Smp parse_model(const std::string& text) {
  Smp m;
  m.initial = -1;
  LineReader reader(text);
  enum class Section { None, States, Trans } section = Section::None;
  auto err = [&](const std::string& msg) {
    fail(errc::bad_model, "line " + std::to_string(reader.number) + ": " + msg);
  };

  auto intern_prop = [&](const std::string& p) {
    int id = m.prop_id(p);
    if (id < 0) {
      m.props.push_back(p);
      id = static_cast<int>(m.props.size()) - 1;
    }
    return id;
  };

  struct RawTransition {
    std::string from, symbol, to, prob;
    int line;
  };
  std::vector<RawTransition> raw;

  while (reader.next()) {
    std::string& line = reader.line;
    if (line.rfind("symbols:", 0) == 0) {
      for (const std::string& s : split_ws(line.substr(8))) m.symbols.push_back(s);
      section = Section::None;
      continue;
    }
    if (line == "states:") { section = Section::States; continue; }
    if (line == "trans:") { section = Section::Trans; continue; }
    if (line.rfind("states:", 0) == 0 || line.rfind("trans:", 0) == 0)
      err("section headers stand alone on their line");

    if (section == Section::States) {
      // NAME [init] [labels { p q ... }]
      std::string labels_part;
      auto brace = line.find('{');
      if (brace != std::string::npos) {
        auto close = line.find('}', brace);
        if (close == std::string::npos) err("unterminated label set");
        labels_part = line.substr(brace + 1, close - brace - 1);
        line = line.substr(0, brace);
      }
      std::vector<std::string> toks = split_ws(line);
      if (toks.empty()) err("missing state name");
      Smp::State st;
      st.name = toks[0];
      bool init = false;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (toks[i] == "init") init = true;
        else if (toks[i] == "labels") continue;
        else err("unexpected token '" + toks[i] + "'");
      }
      for (const std::string& p : split_ws(labels_part)) st.labels.push_back(intern_prop(p));
      std::sort(st.labels.begin(), st.labels.end());
      if (m.state_id(st.name) >= 0) err("duplicate state '" + st.name + "'");
      m.states.push_back(std::move(st));
      if (init) {
        if (m.initial >= 0) err("two states marked init");
        m.initial = static_cast<int>(m.states.size()) - 1;
      }
      continue;
    }
    if (section == Section::Trans) {
      std::vector<std::string> toks = split_ws(line);
      if (toks.size() != 4) err("expected 'STATE SYMBOL STATE PROB'");
      raw.push_back({toks[0], toks[1], toks[2], toks[3], reader.number});
      continue;
    }
    err("content outside any section: '" + line + "'");
  }

  if (m.states.empty()) fail(errc::bad_model, "model has no states");
  if (m.initial < 0) fail(errc::bad_model, "no state marked init");

  for (const RawTransition& r : raw) {
    Smp::Transition t;
    t.from = m.state_id(r.from);
    t.to = m.state_id(r.to);
    t.symbol = m.symbol_id(r.symbol);
    if (t.from < 0) fail(errc::unknown_ref, "line " + std::to_string(r.line) + ": unknown state '" + r.from + "'");
    if (t.to < 0) fail(errc::unknown_ref, "line " + std::to_string(r.line) + ": unknown state '" + r.to + "'");
    if (t.symbol < 0) fail(errc::unknown_ref, "line " + std::to_string(r.line) + ": unknown symbol '" + r.symbol + "'");
    t.prob = parse_rational(r.prob);
    m.transitions.push_back(std::move(t));
  }
  m.rebuild_index();
  m.validate();
  return m;
}

std::string print_model(const Smp& m) {
  std::ostringstream out;
  out << "symbols:";
  for (const std::string& s : m.symbols) out << " " << s;
  out << "\nstates:\n";
  for (std::size_t q = 0; q < m.states.size(); ++q) {
    out << "  " << m.states[q].name;
    if (static_cast<int>(q) == m.initial) out << " init";
    out << " labels {";
    for (std::size_t i = 0; i < m.states[q].labels.size(); ++i)
      out << (i ? " " : " ") << m.props[m.states[q].labels[i]];
    out << (m.states[q].labels.empty() ? "}" : " }");
    out << "\n";
  }
  out << "trans:\n";
  for (const Smp::Transition& t : m.transitions)
    out << "  " << m.states[t.from].name << " " << m.symbols[t.symbol] << " "
        << m.states[t.to].name << " " << rational_string(t.prob) << "\n";
  return out.str();
}

Rational cylinder_measure(const Smp& m, const FiniteRun& run) {
  if (run.states.empty() || run.states.size() != run.symbols.size() + 1)
    fail(errc::not_a_run, "malformed run");
  Rational measure = 1;
  for (std::size_t k = 0; k < run.length(); ++k) {
    bool found = false;
    for (int id : m.group(run.states[k], run.symbols[k])) {
      if (m.transitions[id].to == run.states[k + 1]) {
        measure *= m.transitions[id].prob;
        found = true;
        break;
      }
    }
    if (!found) fail(errc::not_a_run, "step " + std::to_string(k) + " is not a transition");
  }
  return measure;
}

FiniteRun sample_run(const Smp& m, const MarkovianAdversary& adv, std::size_t steps,
                     std::uint64_t seed) {
  if (adv.size() != m.states.size()) fail(errc::bad_model, "adversary size mismatch");
  for (std::size_t q = 0; q < adv.size(); ++q)
    if (m.group(static_cast<int>(q), adv[q]).empty())
      fail(errc::dead_end, "adversary picks a disabled symbol at " + m.states[q].name);

  std::mt19937_64 rng(seed);
  FiniteRun run;
  run.states.push_back(m.initial);
  for (std::size_t k = 0; k < steps; ++k) {
    int q = run.states.back();
    int a = adv[q];
    // Exact inverse-CDF draw: u = r / 2^64 compared against rational partial sums.
    Rational u(Integer(rng()), Integer(1) << 64);
    Rational acc = 0;
    const auto& g = m.group(q, a);
    int chosen = g.back();
    for (int id : g) {
      acc += m.transitions[id].prob;
      if (u < acc) {
        chosen = id;
        break;
      }
    }
    run.symbols.push_back(a);
    run.states.push_back(m.transitions[chosen].to);
  }
  return run;
}

ProductSmp build_product(const Smp& m, const BuchiAutomaton& automaton) {
  ProductSmp out;
  out.acceptance = automaton.acceptance;

  std::vector<int> prop_tracks;
  for (std::size_t i = 0; i < automaton.alphabet.width(); ++i) {
    const Track& t = automaton.alphabet.tracks[i];
    if (t.kind == TrackKind::Proposition) {
      if (m.prop_id(t.name) < 0)
        fail(errc::alphabet_mismatch,
             "automaton proposition track '" + t.name + "' is not a model proposition");
      prop_tracks.push_back(static_cast<int>(i));
    } else {
      out.variable_tracks.push_back(static_cast<int>(i));
    }
  }
  std::size_t width = out.variable_tracks.size();
  if (width > 16) fail(errc::state_blowup, "too many free-variable tracks in the product");
  std::size_t beta_count = std::size_t(1) << width;

  // Product symbols (a, beta), in model-symbol-major order.
  for (std::size_t a = 0; a < m.symbols.size(); ++a) {
    for (std::size_t beta = 0; beta < beta_count; ++beta) {
      std::string name = m.symbols[a];
      if (width > 0) {
        name += "#";
        for (std::size_t i = 0; i < width; ++i) name += (beta & (1ull << i)) ? '1' : '0';
      }
      out.smp.symbols.push_back(name);
      out.beta_of_symbol.push_back(static_cast<int>(beta));
      out.base_symbol.push_back(static_cast<int>(a));
    }
  }
  out.smp.props = m.props;

  // Letter for a model state at a given beta assignment.
  auto letter_of = [&](int q, std::size_t beta) {
    Letter l = 0;
    for (int tr : prop_tracks)
      if (m.has_label(q, m.prop_id(automaton.alphabet.tracks[tr].name))) l |= Letter(1) << tr;
    for (std::size_t i = 0; i < width; ++i)
      if (beta & (1ull << i)) l |= Letter(1) << out.variable_tracks[i];
    return l;
  };

  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> frontier;
  auto intern = [&](int q, int s) {
    auto [it, inserted] = ids.emplace(std::make_pair(q, s), static_cast<int>(ids.size()));
    if (inserted) {
      frontier.emplace_back(q, s);
      out.origin.emplace_back(q, s);
      Smp::State st;
      st.name = m.states[q].name + "*" + std::to_string(s);
      st.labels.clear();
      for (int p : m.states[q].labels) st.labels.push_back(p);
      out.smp.states.push_back(std::move(st));
      out.accepting_mark.push_back(automaton.accepting[s]);
    }
    return it->second;
  };
  out.smp.initial = intern(m.initial, automaton.initial);

  for (std::size_t i = 0; i < frontier.size(); ++i) {
    auto [q, s] = frontier[i];
    int from = ids.at({q, s});
    for (std::size_t beta = 0; beta < beta_count; ++beta) {
      int s_next = automaton.step(s, letter_of(q, beta));
      if (s_next < 0) fail(errc::bad_model, "automaton is not total in the product");
      for (const Smp::Transition& t : m.transitions) {
        if (t.from != q) continue;
        Smp::Transition pt;
        pt.from = from;
        pt.symbol = static_cast<int>(t.symbol * beta_count + beta);
        pt.to = intern(t.to, s_next);
        pt.prob = t.prob;
        out.smp.transitions.push_back(std::move(pt));
      }
    }
  }
  out.smp.rebuild_index();
  out.smp.validate();
  return out;
}

}  // namespace pmlo
