#include "duo/dsl.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "duo/error.hpp"

namespace duo::dsl {

namespace {

enum class Tok { Word, LBrace, RBrace, Caret, Underscore, Bang, Outcome, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

bool is_outcome_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '-' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_blank();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      t.kind = Tok::Word;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) t.text += advance();
      return t;
    }
    switch (c) {
      case '{': t.kind = Tok::LBrace; break;
      case '}': t.kind = Tok::RBrace; break;
      case '^': t.kind = Tok::Caret; break;
      case '_': t.kind = Tok::Underscore; break;
      case '!': t.kind = Tok::Bang; break;
      case '[': {
        advance();
        t.kind = Tok::Outcome;
        while (pos_ < src_.size() && is_outcome_char(src_[pos_])) t.text += advance();
        if (pos_ >= src_.size() || src_[pos_] != ']') {
          throw ParseError(ErrorKind::LexError, "unterminated outcome label", line_, col_);
        }
        if (t.text.empty()) throw ParseError(ErrorKind::LexError, "empty outcome label", t.line, t.column);
        advance();
        return t;
      }
      default: {
        std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + hex(c);
        throw ParseError(ErrorKind::LexError, "unexpected character '" + shown + "'", line_, col_);
      }
    }
    advance();
    return t;
  }

 private:
  static std::string hex(char c) {
    static const char* digits = "0123456789abcdef";
    const auto u = static_cast<unsigned char>(c);
    return {digits[u >> 4], digits[u & 15]};
  }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_type_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalpha(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

/// Letters then digits; returns the letters.
std::optional<std::string> label_type(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0 || i == s.size()) return std::nullopt;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return std::nullopt;
  }
  return std::string(s.substr(0, i));
}

struct LabelUse {
  std::string label;
  bool closed = false;
  int line = 1;
  int column = 1;
};

struct Term {
  OperationSpec spec;
  std::vector<LabelUse> inputs;
  std::vector<LabelUse> outputs;
  int line = 1;
  int column = 1;
};

class Parser {
 public:
  Parser(std::string_view src, const Theory* theory) : lex_(src), theory_(theory) { tok_ = lex_.next(); }

  Fragment run() {
    std::vector<Term> terms;
    while (tok_.kind != Tok::End) terms.push_back(term());
    return build(terms);
  }

 private:
  [[noreturn]] void fail(ErrorKind kind, const std::string& msg, int line, int col) {
    throw ParseError(kind, msg, line, col);
  }
  [[noreturn]] void fail_here(const std::string& msg) { fail(ErrorKind::LexError, msg, tok_.line, tok_.column); }

  void bump() { tok_ = lex_.next(); }

  Term term() {
    if (tok_.kind != Tok::Word) fail_here("expected an apparatus name");
    Term t;
    t.line = tok_.line;
    t.column = tok_.column;
    t.spec.apparatus_id = tok_.text;
    bump();
    if (tok_.kind == Tok::Outcome) {
      t.spec.outcome_label = tok_.text;
      bump();
    }
    bool seen_in = false, seen_out = false;
    while (tok_.kind == Tok::Underscore || tok_.kind == Tok::Caret) {
      const bool in = tok_.kind == Tok::Underscore;
      if ((in && seen_in) || (!in && seen_out)) fail_here(in ? "second input list" : "second output list");
      (in ? seen_in : seen_out) = true;
      bump();
      auto& list = in ? t.inputs : t.outputs;
      if (tok_.kind == Tok::LBrace) {
        bump();
        while (tok_.kind != Tok::RBrace) {
          if (tok_.kind == Tok::End) fail_here("unclosed '{'");
          list.push_back(label());
        }
        bump();
      } else {
        list.push_back(label());
      }
    }
    for (const auto& u : t.inputs) t.spec.input_types.push_back(*label_type(u.label));
    for (const auto& u : t.outputs) t.spec.output_types.push_back(*label_type(u.label));
    check_types(t);
    return t;
  }

  LabelUse label() {
    LabelUse u;
    u.line = tok_.line;
    u.column = tok_.column;
    if (tok_.kind == Tok::Bang) {
      u.closed = true;
      bump();
    }
    if (tok_.kind != Tok::Word) fail_here("expected an index label");
    if (!label_type(tok_.text)) fail_here("'" + tok_.text + "' is not a label (letters then digits)");
    u.label = tok_.text;
    bump();
    return u;
  }

  void check_types(const Term& t) {
    if (!theory_) return;
    for (const auto* list : {&t.spec.input_types, &t.spec.output_types}) {
      for (const auto& ty : *list) {
        if (!theory_->has_type(ty)) {
          fail(ErrorKind::TypeClash, "type '" + ty + "' is not declared in the theory", t.line, t.column);
        }
      }
    }
    const auto* decl = theory_->find_operation(t.spec.apparatus_id);
    if (!decl) return;
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
      return "(" + s + ")";
    };
    if (decl->input_types != t.spec.input_types || decl->output_types != t.spec.output_types) {
      fail(ErrorKind::TypeClash,
           "'" + t.spec.apparatus_id + "' is declared with inputs " + join(decl->input_types) + " and outputs " +
               join(decl->output_types) + ", used with " + join(t.spec.input_types) + " and " +
               join(t.spec.output_types),
           t.line, t.column);
    }
  }

  Fragment build(const std::vector<Term>& terms) {
    Fragment f;
    std::map<std::string, std::pair<Endpoint, const LabelUse*>> producer, consumer;
    std::set<std::string> closed;
    std::vector<Closure> closures;
    std::map<std::string, std::pair<int, int>> where;

    auto claim = [&](const LabelUse& u, bool is_output) {
      if (closed.count(u.label) || (u.closed && (producer.count(u.label) || consumer.count(u.label)))) {
        fail(ErrorKind::TripleUse, "label '" + u.label + "' is closed and also used elsewhere", u.line, u.column);
      }
      if (is_output && producer.count(u.label)) {
        fail(ErrorKind::DuplicateProducer, "label '" + u.label + "' appears twice as an output", u.line, u.column);
      }
      if (!is_output && consumer.count(u.label)) {
        fail(ErrorKind::TripleUse, "label '" + u.label + "' appears twice as an input", u.line, u.column);
      }
      if (u.closed) closed.insert(u.label);
    };

    for (const auto& t : terms) {
      const std::string id = f.add(t.spec);
      where[id] = {t.line, t.column};
      for (std::size_t s = 0; s < t.inputs.size(); ++s) {
        const auto& u = t.inputs[s];
        claim(u, false);
        const Endpoint e{id, static_cast<int>(s)};
        if (u.closed) {
          closures.push_back({{id, Direction::Input, e.slot}, {}, {}});
        } else {
          consumer[u.label] = {e, &u};
        }
      }
      for (std::size_t s = 0; s < t.outputs.size(); ++s) {
        const auto& u = t.outputs[s];
        claim(u, true);
        const Endpoint e{id, static_cast<int>(s)};
        if (u.closed) {
          closures.push_back({{id, Direction::Output, e.slot}, {}, {}});
        } else {
          producer[u.label] = {e, &u};
        }
      }
    }
    for (const auto& [label, p] : producer) {
      auto it = consumer.find(label);
      if (it != consumer.end()) f.connect(p.first, it->second.first);
    }
    for (const auto& v : validate(f).violations) {
      if (v.rule != WiringRule::NoClosedLoops) continue;
      std::string path;
      for (const auto& id : v.cycle) path += (path.empty() ? "" : " -> ") + id;
      const auto [line, col] = v.cycle.empty() ? std::pair{1, 1} : where[v.cycle.front()];
      fail(ErrorKind::CycleError, "wiring forms a loop: " + path, line, col);
    }
    return close_ports(f, closures);
  }

  Lexer lex_;
  const Theory* theory_;
  Token tok_;
};

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Fragment parse(std::string_view src, const Theory* theory) { return Parser(src, theory).run(); }

std::string format(const Fragment& f) {
  std::map<Endpoint, Endpoint> wire_from_output, wire_into_input;
  for (const auto& w : f.wires) {
    wire_from_output[w.from] = w.to;
    wire_into_input[w.to] = w.from;
  }
  auto closing_prep = [&](const std::string& id) {
    const auto& s = f.spec(id);
    return s.apparatus_id == closing_preparation_id(s.output_types.size() == 1 ? s.output_types[0] : "") &&
           s.input_types.empty() && s.outcome_label.empty() && wire_from_output.count({id, 0});
  };
  auto closing_effect = [&](const std::string& id) {
    const auto& s = f.spec(id);
    return s.apparatus_id == closing_effect_id(s.input_types.size() == 1 ? s.input_types[0] : "") &&
           s.output_types.empty() && s.outcome_label.empty() && wire_into_input.count({id, 0});
  };

  int counter = 0;
  std::map<Endpoint, std::string> output_label;  // labels assigned to wired outputs
  auto fresh = [&](const std::string& type) {
    if (!is_type_name(type)) throw Error(ErrorKind::FormatError, "type '" + type + "' is not all letters");
    return type + std::to_string(++counter);
  };

  std::ostringstream os;
  bool first = true;
  for (const auto& id : topological_order(f)) {
    if (closing_prep(id) || closing_effect(id)) continue;
    const auto& s = f.spec(id);
    if (!is_identifier(s.apparatus_id)) {
      throw Error(ErrorKind::FormatError, "apparatus id '" + s.apparatus_id + "' is not a plain identifier");
    }
    for (char c : s.outcome_label) {
      if (!is_outcome_char(c)) throw Error(ErrorKind::FormatError, "outcome '" + s.outcome_label + "' has no spelling");
    }
    if (!first) os << ' ';
    first = false;
    os << s.apparatus_id;
    if (!s.outcome_label.empty()) os << '[' << s.outcome_label << ']';
    if (!s.input_types.empty()) {
      os << "_{";
      for (int k = 0; k < static_cast<int>(s.input_types.size()); ++k) {
        if (k) os << ' ';
        auto it = wire_into_input.find({id, k});
        if (it == wire_into_input.end()) {
          os << fresh(s.input_types[static_cast<std::size_t>(k)]);
        } else if (closing_prep(it->second.instance)) {
          os << '!' << fresh(s.input_types[static_cast<std::size_t>(k)]);
        } else {
          os << output_label.at(it->second);
        }
      }
      os << '}';
    }
    if (!s.output_types.empty()) {
      os << "^{";
      for (int k = 0; k < static_cast<int>(s.output_types.size()); ++k) {
        if (k) os << ' ';
        auto it = wire_from_output.find({id, k});
        const auto label = fresh(s.output_types[static_cast<std::size_t>(k)]);
        if (it != wire_from_output.end() && closing_effect(it->second.instance)) {
          os << '!' << label;
        } else {
          os << label;
          output_label[{id, k}] = label;
        }
      }
      os << '}';
    }
  }
  return os.str();
}

std::string export_dot(const Fragment& f, const Foliation* foliation) {
  std::ostringstream os;
  os << "digraph fragment {\n  rankdir=BT;\n  node [shape=box];\n";
  for (const auto& [id, s] : f.instances) {
    std::string label = s.apparatus_id;
    if (!s.outcome_label.empty()) label += "[" + s.outcome_label + "]";
    os << "  " << dot_quote(id) << " [label=" << dot_quote(label) << "];\n";
  }
  auto sorted = f.wires;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& w : sorted) {
    const auto& type = f.spec(w.from.instance).output_types[static_cast<std::size_t>(w.from.slot)];
    os << "  " << dot_quote(w.from.instance) << " -> " << dot_quote(w.to.instance) << " [label=" << dot_quote(type)
       << "];\n";
  }
  for (const auto& p : f.open_ports()) {
    const auto node = dot_quote("open:" + to_string(p));
    const auto type = dot_quote(f.port_type(p));
    os << "  " << node << " [shape=point];\n";
    if (p.direction == Direction::Input) {
      os << "  " << node << " -> " << dot_quote(p.instance) << " [style=dashed, label=" << type << "];\n";
    } else {
      os << "  " << dot_quote(p.instance) << " -> " << node << " [style=dashed, label=" << type << "];\n";
    }
  }
  if (foliation) {
    std::map<std::size_t, std::vector<std::string>> by_slab;
    for (const auto& [id, slab] : foliation_slabs(f, *foliation)) by_slab[slab].push_back(id);
    for (const auto& [slab, ids] : by_slab) {
      os << "  { rank=same;";
      for (const auto& id : ids) os << ' ' << dot_quote(id) << ';';
      os << " }  // slab " << slab << "\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace duo::dsl
