#include "dcs/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "dcs/version.hpp"

namespace dcs {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Colon, Semi, LBrace, RBrace, Dash, Arrow, Bar, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t j = 0; j < n; ++j, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const std::size_t l = line, k = col;
    if (is_ident_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), l, k});
      advance(j - i);
      continue;
    }
    auto next_is = [&](char n) { return i + 1 < text.size() && text[i + 1] == n; };
    switch (c) {
      case ':': out.push_back({Tok::Colon, ":", l, k}); advance(1); break;
      case ';': out.push_back({Tok::Semi, ";", l, k}); advance(1); break;
      case '{': out.push_back({Tok::LBrace, "{", l, k}); advance(1); break;
      case '}': out.push_back({Tok::RBrace, "}", l, k}); advance(1); break;
      case '-':
        if (next_is('>')) {
          out.push_back({Tok::Arrow, "->", l, k});
          advance(2);
        } else {
          out.push_back({Tok::Dash, "-", l, k});
          advance(1);
        }
        break;
      case '|':
        if (!next_is('|')) throw ParseError("expected '||'", l, k);
        out.push_back({Tok::Bar, "||", l, k});
        advance(2);
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", l, k);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

struct RawTransition {
  Token source, label, target;
};

struct RawComponent {
  Token name;
  std::vector<Token> states;
  std::vector<Token> marked;
  std::optional<Token> init;
  std::vector<Token> alphabet;
  std::optional<std::vector<Token>> controllable;
  std::vector<RawTransition> transitions;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  CompositeModel parse() {
    std::vector<Token> controllable;
    std::optional<std::vector<Token>> compose;
    std::map<std::string, RawComponent> components;
    while (peek().kind != Tok::End) {
      const Token kw = expect(Tok::Ident, "'component', 'controllable' or 'compose'");
      if (kw.text == "controllable") {
        expect(Tok::Colon, "':'");
        auto ids = ident_list();
        controllable.insert(controllable.end(), ids.begin(), ids.end());
      } else if (kw.text == "component") {
        RawComponent c = component();
        const std::string name = c.name.text;
        if (!components.emplace(name, std::move(c)).second) {
          throw ParseError("duplicate component '" + name + "'", kw.line, kw.column);
        }
      } else if (kw.text == "compose") {
        if (compose) throw ParseError("duplicate compose directive", kw.line, kw.column);
        expect(Tok::Colon, "':'");
        std::vector<Token> names{expect(Tok::Ident, "component name")};
        while (peek().kind == Tok::Bar) {
          next();
          names.push_back(expect(Tok::Ident, "component name"));
        }
        expect(Tok::Semi, "';'");
        compose = std::move(names);
      } else {
        throw ParseError("unexpected '" + kw.text + "'", kw.line, kw.column);
      }
    }
    const Token& end = peek();
    if (!compose) throw ParseError("missing compose directive", end.line, end.column);
    return build(controllable, *compose, components);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  Token expect(Tok kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) {
      throw ParseError(std::string("expected ") + what + ", found '" +
                           (t.kind == Tok::End ? std::string("end of input") : t.text) + "'",
                       t.line, t.column);
    }
    return next();
  }

  std::vector<Token> ident_list() {
    std::vector<Token> ids;
    while (peek().kind == Tok::Ident) ids.push_back(next());
    expect(Tok::Semi, "';'");
    return ids;
  }

  RawComponent component() {
    RawComponent c;
    c.name = expect(Tok::Ident, "component name");
    expect(Tok::LBrace, "'{'");
    while (peek().kind != Tok::RBrace) {
      const Token key = expect(Tok::Ident, "section keyword");
      expect(Tok::Colon, "':'");
      if (key.text == "states") {
        auto ids = ident_list();
        c.states.insert(c.states.end(), ids.begin(), ids.end());
      } else if (key.text == "marked") {
        auto ids = ident_list();
        c.marked.insert(c.marked.end(), ids.begin(), ids.end());
      } else if (key.text == "init") {
        if (c.init) throw ParseError("duplicate init", key.line, key.column);
        c.init = expect(Tok::Ident, "initial state");
        expect(Tok::Semi, "';'");
      } else if (key.text == "alphabet") {
        auto ids = ident_list();
        c.alphabet.insert(c.alphabet.end(), ids.begin(), ids.end());
      } else if (key.text == "controllable") {
        auto ids = ident_list();
        if (!c.controllable) c.controllable.emplace();
        c.controllable->insert(c.controllable->end(), ids.begin(), ids.end());
      } else if (key.text == "trans") {
        // source -label-> target ; repeated until the next section or '}'
        while (peek().kind == Tok::Ident && peek(1).kind == Tok::Dash) {
          RawTransition t;
          t.source = next();
          next();
          t.label = expect(Tok::Ident, "label");
          expect(Tok::Arrow, "'->'");
          t.target = expect(Tok::Ident, "target state");
          expect(Tok::Semi, "';'");
          c.transitions.push_back(std::move(t));
        }
      } else {
        throw ParseError("unknown section '" + key.text + "'", key.line, key.column);
      }
    }
    expect(Tok::RBrace, "'}'");
    return c;
  }

  static CompositeModel build(const std::vector<Token>& controllable,
                              const std::vector<Token>& compose,
                              const std::map<std::string, RawComponent>& components) {
    std::set<std::string> global_ctrl;
    for (const auto& t : controllable) global_ctrl.insert(t.text);

    std::vector<Automaton> automata;
    std::set<std::string> used_names, all_labels;
    for (const auto& ref : compose) {
      auto it = components.find(ref.text);
      if (it == components.end()) {
        throw ParseError("unknown component '" + ref.text + "'", ref.line, ref.column);
      }
      if (!used_names.insert(ref.text).second) {
        throw ParseError("component '" + ref.text + "' composed twice", ref.line, ref.column);
      }
      automata.push_back(build_component(it->second, global_ctrl));
      all_labels.insert(automata.back().alphabet.begin(), automata.back().alphabet.end());
    }
    for (const auto& t : controllable) {
      if (!all_labels.count(t.text)) {
        throw ParseError("unknown label '" + t.text + "' in controllable list", t.line,
                         t.column);
      }
    }
    try {
      return CompositeModel(std::move(automata));
    } catch (const ModelError& e) {
      throw ParseError(e.what(), compose.front().line, compose.front().column);
    }
  }

  static Automaton build_component(const RawComponent& raw,
                                   const std::set<std::string>& global_ctrl) {
    Automaton a;
    a.name = raw.name.text;
    std::map<std::string, LocalState> state_ids;
    for (const auto& s : raw.states) {
      if (!state_ids.emplace(s.text, static_cast<LocalState>(a.states.size())).second) {
        throw ParseError("duplicate state '" + s.text + "'", s.line, s.column);
      }
      a.states.push_back(s.text);
    }
    if (a.states.empty()) {
      throw ParseError("component '" + a.name + "' declares no states", raw.name.line,
                       raw.name.column);
    }
    auto resolve = [&](const Token& t) {
      auto it = state_ids.find(t.text);
      if (it == state_ids.end()) {
        throw ParseError("dangling state reference '" + t.text + "' in component '" + a.name +
                             "'",
                         t.line, t.column);
      }
      return it->second;
    };
    if (!raw.init) {
      throw ParseError("component '" + a.name + "' has no init", raw.name.line, raw.name.column);
    }
    a.initial = resolve(*raw.init);
    a.marked.assign(a.states.size(), false);
    for (const auto& m : raw.marked) a.marked[resolve(m)] = true;

    std::set<std::string> alphabet;
    for (const auto& t : raw.alphabet) alphabet.insert(t.text);
    for (const auto& t : raw.transitions) alphabet.insert(t.label.text);
    a.alphabet.assign(alphabet.begin(), alphabet.end());
    for (const auto& l : a.alphabet) a.controllable.push_back(global_ctrl.count(l) > 0);

    if (raw.controllable) {
      std::set<std::string> local;
      for (const auto& t : *raw.controllable) {
        if (!alphabet.count(t.text)) {
          throw ParseError("unknown label '" + t.text + "' in component '" + a.name + "'",
                           t.line, t.column);
        }
        if (!global_ctrl.count(t.text)) {
          throw ParseError("inconsistent controllability for label '" + t.text + "'", t.line,
                           t.column);
        }
        local.insert(t.text);
      }
      for (const auto& l : a.alphabet) {
        if (global_ctrl.count(l) && !local.count(l)) {
          throw ParseError("inconsistent controllability for label '" + l + "'",
                           raw.name.line, raw.name.column);
        }
      }
    }

    for (const auto& t : raw.transitions) {
      a.transitions.push_back({resolve(t.source),
                               static_cast<std::uint32_t>(a.label_index(t.label.text)),
                               resolve(t.target)});
    }
    std::sort(a.transitions.begin(), a.transitions.end());
    a.transitions.erase(std::unique(a.transitions.begin(), a.transitions.end()),
                        a.transitions.end());
    return a;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

CompositeModel parse_model(std::string_view text) { return Parser(tokenize(text)).parse(); }

std::string serialize_model(const CompositeModel& model) {
  std::ostringstream os;
  os << "# dcs model format " << kModelFormatVersion << "\n";
  os << "controllable:";
  for (LabelId l = 0; l < model.num_labels(); ++l) {
    if (model.is_controllable(l)) os << ' ' << model.label_name(l);
  }
  os << ";\n";
  for (const auto& c : model.components()) {
    os << "\ncomponent " << c.name << " {\n  states:";
    for (const auto& s : c.states) os << ' ' << s;
    os << ";\n  init: " << c.states[c.initial] << ";\n  marked:";
    for (std::size_t s = 0; s < c.states.size(); ++s) {
      if (c.marked[s]) os << ' ' << c.states[s];
    }
    os << ";\n";
    std::vector<bool> used(c.alphabet.size(), false);
    for (const auto& t : c.transitions) used[t.label] = true;
    if (std::find(used.begin(), used.end(), false) != used.end()) {
      os << "  alphabet:";
      for (std::size_t l = 0; l < c.alphabet.size(); ++l) {
        if (!used[l]) os << ' ' << c.alphabet[l];
      }
      os << ";\n";
    }
    auto transitions = c.transitions;
    std::sort(transitions.begin(), transitions.end());
    os << "  trans:\n";
    for (const auto& t : transitions) {
      os << "    " << c.states[t.source] << " -" << c.alphabet[t.label] << "-> "
         << c.states[t.target] << ";\n";
    }
    os << "}\n";
  }
  os << "\ncompose:";
  for (std::size_t i = 0; i < model.num_components(); ++i) {
    os << (i == 0 ? " " : " || ") << model.components()[i].name;
  }
  os << ";\n";
  return os.str();
}

CompositeModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

void save_model_file(const CompositeModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
  out << serialize_model(model);
}

}  // namespace dcs
