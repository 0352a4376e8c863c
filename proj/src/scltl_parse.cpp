#include "cosyn/error.hpp"
#include "cosyn/scltl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cosyn {

namespace ltl {

namespace {
NodePtr make(NodeKind kind, int atom = -1, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  return std::make_shared<const FormulaNode>(FormulaNode{kind, atom, std::move(lhs), std::move(rhs)});
}
}  // namespace

NodePtr make_true() { return make(NodeKind::True); }
NodePtr make_false() { return make(NodeKind::False); }
NodePtr atom(int index) { return make(NodeKind::Atom, index); }
NodePtr neg_atom(int index) { return make(NodeKind::NegAtom, index); }
NodePtr conj(NodePtr lhs, NodePtr rhs) { return make(NodeKind::And, -1, std::move(lhs), std::move(rhs)); }
NodePtr disj(NodePtr lhs, NodePtr rhs) { return make(NodeKind::Or, -1, std::move(lhs), std::move(rhs)); }
NodePtr next(NodePtr sub) { return make(NodeKind::Next, -1, std::move(sub)); }
NodePtr until(NodePtr lhs, NodePtr rhs) { return make(NodeKind::Until, -1, std::move(lhs), std::move(rhs)); }

NodePtr next_n(NodePtr sub, int times) {
  for (int i = 0; i < times; ++i) sub = next(std::move(sub));
  return sub;
}

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->atom != b->atom) return false;
  return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
}

int depth(const NodePtr& node) {
  if (!node) return 0;
  return 1 + std::max(depth(node->lhs), depth(node->rhs));
}

}  // namespace ltl

std::string to_string(const NodePtr& node, const std::vector<std::string>& ap) {
  switch (node->kind) {
    case NodeKind::True: return "true";
    case NodeKind::False: return "false";
    case NodeKind::Atom: return ap.at(node->atom);
    case NodeKind::NegAtom: return "!" + ap.at(node->atom);
    case NodeKind::And: return "(" + to_string(node->lhs, ap) + " & " + to_string(node->rhs, ap) + ")";
    case NodeKind::Or: return "(" + to_string(node->lhs, ap) + " | " + to_string(node->rhs, ap) + ")";
    case NodeKind::Next: return "X " + to_string(node->lhs, ap);
    case NodeKind::Until: return "(" + to_string(node->lhs, ap) + " U " + to_string(node->rhs, ap) + ")";
  }
  return {};
}

std::string to_string(const Formula& f) { return to_string(f.root, f.ap); }

namespace {

enum class Tok { Ident, Int, Not, And, Or, LParen, RParen, LBracket, RBracket, Comma, Caret, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), i});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Int, std::string(s.substr(i, j - i)), i});
      i = j;
      continue;
    }
    Tok kind;
    switch (c) {
      case '!': kind = Tok::Not; break;
      case '&': kind = Tok::And; break;
      case '|': kind = Tok::Or; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '[': kind = Tok::LBracket; break;
      case ']': kind = Tok::RBracket; break;
      case ',': kind = Tok::Comma; break;
      case '^': kind = Tok::Caret; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({kind, std::string(1, c), i});
    ++i;
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const std::vector<std::string>& ap) : toks_(std::move(tokens)), ap_(ap) {}

  NodePtr parse_all() {
    NodePtr f = parse_until();
    if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
    return f;
  }

 private:
  const Token& peek() const { return toks_[at_]; }
  const Token& take() { return toks_[at_++]; }
  bool is_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  const Token& expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) {
      throw ParseError("expected " + std::string(what), peek().pos);
    }
    return take();
  }

  int parse_int() {
    const Token& t = expect(Tok::Int, "integer");
    try {
      return std::stoi(t.text);
    } catch (const std::exception&) {
      throw ParseError("integer out of range", t.pos);
    }
  }

  NodePtr parse_until() {
    NodePtr lhs = parse_or();
    if (is_keyword("U")) {
      take();
      NodePtr rhs = parse_until();
      return ltl::until(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  NodePtr parse_or() {
    NodePtr lhs = parse_and();
    while (peek().kind == Tok::Or) {
      take();
      lhs = ltl::disj(std::move(lhs), parse_and());
    }
    return lhs;
  }

  NodePtr parse_and() {
    NodePtr lhs = parse_unary();
    while (peek().kind == Tok::And) {
      take();
      lhs = ltl::conj(std::move(lhs), parse_unary());
    }
    return lhs;
  }

  std::pair<int, int> parse_bounds() {
    expect(Tok::LBracket, "'['");
    const std::size_t pos = peek().pos;
    const int lo = parse_int();
    expect(Tok::Comma, "','");
    const int hi = parse_int();
    expect(Tok::RBracket, "']'");
    if (lo > hi) throw ParseError("empty interval", pos);
    return {lo, hi};
  }

  NodePtr parse_unary() {
    const Token& t = peek();
    if (t.kind == Tok::Not) {
      take();
      NodePtr sub = parse_unary();
      if (sub->kind != NodeKind::Atom) throw ParseError("negation applied to a non-atom", t.pos);
      return ltl::neg_atom(sub->atom);
    }
    if (is_keyword("X")) {
      take();
      int times = 1;
      if (peek().kind == Tok::Caret) {
        take();
        times = parse_int();
      }
      return ltl::next_n(parse_unary(), times);
    }
    if ((is_keyword("G") || is_keyword("F")) && toks_[at_ + 1].kind == Tok::LBracket) {
      const bool always = take().text == "G";
      const auto [lo, hi] = parse_bounds();
      NodePtr sub = parse_unary();
      // Right-nested: op(X^lo p, op(X^{lo+1} p, ...)).
      NodePtr acc = ltl::next_n(sub, hi);
      for (int k = hi - 1; k >= lo; --k) {
        NodePtr shifted = ltl::next_n(sub, k);
        acc = always ? ltl::conj(std::move(shifted), std::move(acc)) : ltl::disj(std::move(shifted), std::move(acc));
      }
      return acc;
    }
    return parse_primary();
  }

  NodePtr parse_primary() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::LParen: {
        NodePtr f = parse_until();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Ident: {
        if (t.text == "true") return ltl::make_true();
        if (t.text == "false") return ltl::make_false();
        if (t.text == "U" || t.text == "X" || t.text == "G" || t.text == "F") {
          throw ParseError("misplaced operator '" + t.text + "'", t.pos);
        }
        const auto it = std::find(ap_.begin(), ap_.end(), t.text);
        if (it == ap_.end()) throw ParseError("unknown proposition '" + t.text + "'", t.pos);
        return ltl::atom(static_cast<int>(it - ap_.begin()));
      }
      case Tok::End: throw ParseError("unexpected end of formula", t.pos);
      default: throw ParseError("unexpected '" + t.text + "'", t.pos);
    }
  }

  std::vector<Token> toks_;
  const std::vector<std::string>& ap_;
  std::size_t at_ = 0;
};

}  // namespace

Formula parse(std::string_view text, std::vector<std::string> ap) {
  for (std::size_t i = 0; i < ap.size(); ++i) {
    for (std::size_t j = i + 1; j < ap.size(); ++j) {
      if (ap[i] == ap[j]) throw ConfigError("duplicate proposition '" + ap[i] + "'");
    }
  }
  Parser parser(tokenize(text), ap);
  NodePtr root = parser.parse_all();
  return Formula{std::move(root), std::move(ap)};
}

Letter make_letter(const std::vector<std::string>& ap, std::initializer_list<std::string_view> props) {
  Letter a = 0;
  for (std::string_view p : props) {
    const auto it = std::find(ap.begin(), ap.end(), p);
    if (it == ap.end()) throw ConfigError("unknown proposition '" + std::string(p) + "'");
    a |= Letter{1} << (it - ap.begin());
  }
  return a;
}

std::string read_formula_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open formula file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace cosyn
