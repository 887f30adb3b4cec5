#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zofield/configuration.hpp"
#include "zofield/errors.hpp"
#include "zofield/torus.hpp"

namespace zofield {

// A complete description fixes the color of every vertex of one ball; it is
// exactly a local configuration read as a conjunction of literals.
using CompleteDescription = LocalConfiguration;

inline constexpr std::size_t default_enumeration_cap = 25;  // bits of ball size

// ---------------------------------------------------------------------------
// Local formulas: boolean combinations of color atoms C(offset) over one ball.

struct FormulaNode;
using FormulaPtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  enum class Kind { atom, negation, conjunction, disjunction };
  Kind kind = Kind::atom;
  std::vector<int> offset;  // atom only
  int offset_index = -1;    // position of the offset in the radius-r template
  FormulaPtr lhs, rhs;      // negation uses lhs only
};

// A formula about the ball around one free vertex: atoms reference offsets
// inside B(0,r), never absolute vertices.
class LocalFormula {
 public:
  LocalFormula() = default;
  LocalFormula(int radius, FormulaPtr root)
      : radius_(radius), root_(std::move(root)) {}

  int radius() const { return radius_; }
  const FormulaPtr& root() const { return root_; }

  // Evaluate on word-packed ball colors (canonical offset order).
  bool eval_bits(std::span<const std::uint64_t> bits) const {
    return eval_node(*root_, bits);
  }

  bool eval(const LocalConfiguration& lc) const {
    return eval_bits(lc.words());
  }

 private:
  static bool eval_node(const FormulaNode& n,
                        std::span<const std::uint64_t> bits) {
    switch (n.kind) {
      case FormulaNode::Kind::atom: {
        const std::size_t i = static_cast<std::size_t>(n.offset_index);
        return (bits[i >> 6] >> (i & 63)) & std::uint64_t{1};
      }
      case FormulaNode::Kind::negation:
        return !eval_node(*n.lhs, bits);
      case FormulaNode::Kind::conjunction:
        return eval_node(*n.lhs, bits) && eval_node(*n.rhs, bits);
      case FormulaNode::Kind::disjunction:
        return eval_node(*n.lhs, bits) || eval_node(*n.rhs, bits);
    }
    return false;
  }

  int radius_ = 0;
  FormulaPtr root_;
};

// One quantifier block: m witnesses, pairwise graph distance > 2r, witness i
// satisfying formula i on its radius-r ball.
struct BasicLocalSentence {
  int witness_count = 1;
  int radius = 0;
  std::vector<LocalFormula> formulas;  // size == witness_count, shared radius
};

struct SentenceNode;
using SentencePtr = std::shared_ptr<const SentenceNode>;

struct SentenceNode {
  enum class Kind { leaf, negation, conjunction, disjunction };
  Kind kind = Kind::leaf;
  BasicLocalSentence leaf;
  SentencePtr lhs, rhs;
};

// Boolean combination of basic local sentences.
struct SentenceAst {
  SentencePtr root;

  void leaves(std::vector<const BasicLocalSentence*>& out) const {
    collect(root.get(), out);
  }

  std::vector<const BasicLocalSentence*> leaves() const {
    std::vector<const BasicLocalSentence*> out;
    leaves(out);
    return out;
  }

  int max_radius() const {
    int r = 0;
    for (const auto* l : leaves()) r = std::max(r, l->radius);
    return r;
  }

 private:
  static void collect(const SentenceNode* n,
                      std::vector<const BasicLocalSentence*>& out) {
    if (!n) return;
    if (n->kind == SentenceNode::Kind::leaf) {
      out.push_back(&n->leaf);
      return;
    }
    collect(n->lhs.get(), out);
    collect(n->rhs.get(), out);
  }
};

// ---------------------------------------------------------------------------
// Canonical printing. Every binary node is parenthesized, so printing is
// idempotent and parse(print(ast)) reproduces the tree exactly.

inline std::string print_formula(const FormulaNode& n) {
  switch (n.kind) {
    case FormulaNode::Kind::atom: {
      std::string s = "C(";
      for (std::size_t i = 0; i < n.offset.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(n.offset[i]);
      }
      return s + ")";
    }
    case FormulaNode::Kind::negation:
      return "!" + print_formula(*n.lhs);
    case FormulaNode::Kind::conjunction:
      return "(" + print_formula(*n.lhs) + " & " + print_formula(*n.rhs) + ")";
    case FormulaNode::Kind::disjunction:
      return "(" + print_formula(*n.lhs) + " | " + print_formula(*n.rhs) + ")";
  }
  return {};
}

inline std::string print_sentence_node(const SentenceNode& n) {
  switch (n.kind) {
    case SentenceNode::Kind::leaf: {
      std::string s = "EXIST " + std::to_string(n.leaf.witness_count) +
                      " BALL r=" + std::to_string(n.leaf.radius);
      for (const auto& f : n.leaf.formulas)
        s += " { " + print_formula(*f.root()) + " }";
      return s;
    }
    case SentenceNode::Kind::negation:
      return "!" + print_sentence_node(*n.lhs);
    case SentenceNode::Kind::conjunction:
      return "(" + print_sentence_node(*n.lhs) + " && " +
             print_sentence_node(*n.rhs) + ")";
    case SentenceNode::Kind::disjunction:
      return "(" + print_sentence_node(*n.lhs) + " || " +
             print_sentence_node(*n.rhs) + ")";
  }
  return {};
}

inline std::string print_sentence(const SentenceAst& ast) {
  return print_sentence_node(*ast.root);
}

// FNV-1a over the canonical print; stable across runs and machines.
inline std::uint64_t sentence_hash(const SentenceAst& ast) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : print_sentence(ast)) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Parser. Grammar (whitespace-insensitive):
//   sentence := clause | "!" sentence | sentence ("&&"|"||") sentence
//             | "(" sentence ")"
//   clause   := "EXIST" INT "BALL" "r=" INT body+   (exactly INT bodies)
//   body     := "{" formula "}"
//   formula  := atom | "!" formula | formula ("&"|"|") formula
//             | "(" formula ")"
//   atom     := "C(" INT ("," INT)* ")"             (arity d, offset in ball)
// Precedence: ! over &/&& over |/||; binary operators associate left.

namespace detail {

struct Token {
  enum class Kind {
    kw_exist,
    kw_ball,
    radius_assign,  // "r="
    integer,
    lbrace,
    rbrace,
    lparen,
    rparen,
    comma,
    bang,
    amp,
    ampamp,
    pipe,
    pipepipe,
    atom_c,  // "C" immediately before "("
    end
  };
  Kind kind;
  long value = 0;
  int line = 1;
  int column = 1;
};

class SentenceLexer {
 public:
  explicit SentenceLexer(std::string_view text) : text_(text) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw parse_error(tok_.line, tok_.column, msg);
  }

 private:
  void next() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      bump();
    tok_.line = line_;
    tok_.column = column_;
    if (pos_ >= text_.size()) {
      tok_.kind = Token::Kind::end;
      return;
    }
    const char c = text_[pos_];
    switch (c) {
      case '{': bump(); tok_.kind = Token::Kind::lbrace; return;
      case '}': bump(); tok_.kind = Token::Kind::rbrace; return;
      case '(': bump(); tok_.kind = Token::Kind::lparen; return;
      case ')': bump(); tok_.kind = Token::Kind::rparen; return;
      case ',': bump(); tok_.kind = Token::Kind::comma; return;
      case '!': bump(); tok_.kind = Token::Kind::bang; return;
      case '&':
        bump();
        if (pos_ < text_.size() && text_[pos_] == '&') {
          bump();
          tok_.kind = Token::Kind::ampamp;
        } else {
          tok_.kind = Token::Kind::amp;
        }
        return;
      case '|':
        bump();
        if (pos_ < text_.size() && text_[pos_] == '|') {
          bump();
          tok_.kind = Token::Kind::pipepipe;
        } else {
          tok_.kind = Token::Kind::pipe;
        }
        return;
      default: break;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      bump();
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        bump();
      const std::string lit(text_.substr(start, pos_ - start));
      if (lit == "-")
        throw parse_error(tok_.line, tok_.column, "lone '-' is not a number");
      tok_.kind = Token::Kind::integer;
      tok_.value = std::stol(lit);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isalpha(static_cast<unsigned char>(text_[pos_])))
        bump();
      const std::string word(text_.substr(start, pos_ - start));
      if (word == "EXIST") {
        tok_.kind = Token::Kind::kw_exist;
        return;
      }
      if (word == "BALL") {
        tok_.kind = Token::Kind::kw_ball;
        return;
      }
      if (word == "C") {
        tok_.kind = Token::Kind::atom_c;
        return;
      }
      if (word == "r") {
        if (pos_ < text_.size() && text_[pos_] == '=') {
          bump();
          tok_.kind = Token::Kind::radius_assign;
          return;
        }
        throw parse_error(tok_.line, tok_.column, "expected '=' after 'r'");
      }
      throw parse_error(tok_.line, tok_.column, "unknown word \"" + word + "\"");
    }
    throw parse_error(tok_.line, tok_.column,
                      std::string("unexpected character '") + c + "'");
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  Token tok_;
};

class SentenceParser {
 public:
  SentenceParser(std::string_view text, const TorusParams& geometry)
      : lex_(text), geom_(geometry) {}

  SentenceAst parse() {
    SentenceAst ast{parse_sentence_or()};
    if (lex_.peek().kind != Token::Kind::end)
      lex_.fail("trailing input after sentence");
    return ast;
  }

 private:
  using Kind = Token::Kind;

  SentencePtr parse_sentence_or() {
    SentencePtr node = parse_sentence_and();
    while (lex_.peek().kind == Kind::pipepipe) {
      lex_.take();
      auto p = std::make_shared<SentenceNode>();
      p->kind = SentenceNode::Kind::disjunction;
      p->lhs = std::move(node);
      p->rhs = parse_sentence_and();
      node = std::move(p);
    }
    return node;
  }

  SentencePtr parse_sentence_and() {
    SentencePtr node = parse_sentence_unary();
    while (lex_.peek().kind == Kind::ampamp) {
      lex_.take();
      auto p = std::make_shared<SentenceNode>();
      p->kind = SentenceNode::Kind::conjunction;
      p->lhs = std::move(node);
      p->rhs = parse_sentence_unary();
      node = std::move(p);
    }
    return node;
  }

  SentencePtr parse_sentence_unary() {
    const Token t = lex_.peek();
    if (t.kind == Kind::bang) {
      lex_.take();
      auto p = std::make_shared<SentenceNode>();
      p->kind = SentenceNode::Kind::negation;
      p->lhs = parse_sentence_unary();
      return p;
    }
    if (t.kind == Kind::lparen) {
      lex_.take();
      SentencePtr inner = parse_sentence_or();
      expect(Kind::rparen, "expected ')'");
      return inner;
    }
    if (t.kind == Kind::kw_exist) return parse_clause();
    lex_.fail("expected a clause, '!', or '('");
  }

  SentencePtr parse_clause() {
    expect(Kind::kw_exist, "expected EXIST");
    const Token mTok = expect(Kind::integer, "expected witness count");
    if (mTok.value < 1)
      throw parse_error(mTok.line, mTok.column, "witness count must be >= 1");
    expect(Kind::kw_ball, "expected BALL");
    expect(Kind::radius_assign, "expected r=");
    const Token rTok = expect(Kind::integer, "expected radius");
    if (rTok.value < 0)
      throw parse_error(rTok.line, rTok.column, "radius must be >= 0");

    auto node = std::make_shared<SentenceNode>();
    node->kind = SentenceNode::Kind::leaf;
    node->leaf.witness_count = static_cast<int>(mTok.value);
    node->leaf.radius = static_cast<int>(rTok.value);
    const auto ball = offset_ball(geom_.d, geom_.norm_p, geom_.rho,
                                  node->leaf.radius);
    while (lex_.peek().kind == Kind::lbrace) {
      lex_.take();
      FormulaPtr f = parse_formula_or(*ball);
      expect(Kind::rbrace, "expected '}'");
      node->leaf.formulas.emplace_back(node->leaf.radius, std::move(f));
    }
    if (static_cast<int>(node->leaf.formulas.size()) !=
        node->leaf.witness_count)
      throw parse_error(mTok.line, mTok.column,
                        "clause declares " + std::to_string(mTok.value) +
                            " witnesses but has " +
                            std::to_string(node->leaf.formulas.size()) +
                            " formula bodies");
    return node;
  }

  FormulaPtr parse_formula_or(const BallTemplate& ball) {
    FormulaPtr node = parse_formula_and(ball);
    while (lex_.peek().kind == Kind::pipe) {
      lex_.take();
      auto p = std::make_shared<FormulaNode>();
      p->kind = FormulaNode::Kind::disjunction;
      p->lhs = std::move(node);
      p->rhs = parse_formula_and(ball);
      node = std::move(p);
    }
    return node;
  }

  FormulaPtr parse_formula_and(const BallTemplate& ball) {
    FormulaPtr node = parse_formula_unary(ball);
    while (lex_.peek().kind == Kind::amp) {
      lex_.take();
      auto p = std::make_shared<FormulaNode>();
      p->kind = FormulaNode::Kind::conjunction;
      p->lhs = std::move(node);
      p->rhs = parse_formula_unary(ball);
      node = std::move(p);
    }
    return node;
  }

  FormulaPtr parse_formula_unary(const BallTemplate& ball) {
    const Token t = lex_.peek();
    if (t.kind == Kind::bang) {
      lex_.take();
      auto p = std::make_shared<FormulaNode>();
      p->kind = FormulaNode::Kind::negation;
      p->lhs = parse_formula_unary(ball);
      return p;
    }
    if (t.kind == Kind::lparen) {
      lex_.take();
      FormulaPtr inner = parse_formula_or(ball);
      expect(Kind::rparen, "expected ')'");
      return inner;
    }
    if (t.kind == Kind::atom_c) return parse_atom(ball);
    lex_.fail("expected an atom, '!', or '('");
  }

  FormulaPtr parse_atom(const BallTemplate& ball) {
    const Token cTok = expect(Kind::atom_c, "expected C");
    expect(Kind::lparen, "expected '(' after C");
    std::vector<int> offset;
    offset.push_back(static_cast<int>(
        expect(Kind::integer, "expected offset coordinate").value));
    while (lex_.peek().kind == Kind::comma) {
      lex_.take();
      offset.push_back(static_cast<int>(
          expect(Kind::integer, "expected offset coordinate").value));
    }
    expect(Kind::rparen, "expected ')'");
    if (static_cast<int>(offset.size()) != geom_.d)
      throw parse_error(cTok.line, cTok.column,
                        "atom offset has arity " +
                            std::to_string(offset.size()) +
                            " but the torus dimension is " +
                            std::to_string(geom_.d));
    const std::ptrdiff_t idx = ball.find(offset);
    if (idx < 0)
      throw parse_error(cTok.line, cTok.column,
                        "atom offset outside B(0," +
                            std::to_string(ball.radius) + ")");
    auto p = std::make_shared<FormulaNode>();
    p->kind = FormulaNode::Kind::atom;
    p->offset = std::move(offset);
    p->offset_index = static_cast<int>(idx);
    return p;
  }

  Token expect(Kind k, const std::string& msg) {
    if (lex_.peek().kind != k) lex_.fail(msg);
    return lex_.take();
  }

  SentenceLexer lex_;
  TorusParams geom_;
};

}  // namespace detail

// Parse a sentence against a torus geometry. Only d, p, and rho take part in
// validation; the side length matters when the sentence is evaluated.
inline SentenceAst parse_sentence(std::string_view text,
                                  const TorusParams& geometry) {
  validate(geometry);
  return detail::SentenceParser(text, geometry).parse();
}

// ---------------------------------------------------------------------------
// Decomposition of a local formula into the complete descriptions implying it.

namespace detail {

template <typename Fn>
void enumerate_satisfying(const LocalFormula& psi, const BallTemplate& ball,
                          std::size_t cap_bits, Fn&& fn) {
  const std::size_t beta = ball.beta();
  if (beta > cap_bits)
    throw cap_error("ball size " + std::to_string(beta) +
                    " exceeds the enumeration cap of " +
                    std::to_string(cap_bits) + " bits");
  const std::uint64_t total = std::uint64_t{1} << beta;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (psi.eval_bits(std::span<const std::uint64_t>(&mask, 1)))
      fn(mask);
  }
}

}  // namespace detail

// All complete descriptions D with D -> psi, by scanning the 2^beta ball
// colorings; empty exactly when psi is unsatisfiable. Ascending mask order.
inline std::vector<CompleteDescription> decompose(
    const LocalFormula& psi, const TorusParams& geometry,
    std::size_t cap_bits = default_enumeration_cap) {
  validate(geometry);
  const auto ball =
      offset_ball(geometry.d, geometry.norm_p, geometry.rho, psi.radius());
  std::vector<CompleteDescription> out;
  detail::enumerate_satisfying(psi, *ball, cap_bits, [&](std::uint64_t mask) {
    out.push_back(CompleteDescription::from_mask(ball, mask));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Index of a basic local sentence: max over witnesses of the minimal
// plus-count among the complete descriptions satisfying that witness's
// formula; unbounded when some formula is unsatisfiable.

struct SentenceIndex {
  std::optional<int> k;                           // nullopt = infinite
  std::vector<std::optional<int>> per_formula_min;  // min plus-count per psi

  bool is_infinite() const { return !k.has_value(); }
};

inline SentenceIndex sentence_index(
    const BasicLocalSentence& sentence, const TorusParams& geometry,
    std::size_t cap_bits = default_enumeration_cap) {
  validate(geometry);
  const auto ball = offset_ball(geometry.d, geometry.norm_p, geometry.rho,
                                sentence.radius);
  SentenceIndex result;
  int best = 0;
  bool infinite = false;
  for (const auto& psi : sentence.formulas) {
    std::optional<int> min_plus;
    detail::enumerate_satisfying(psi, *ball, cap_bits, [&](std::uint64_t m) {
      const int k = std::popcount(m);
      if (!min_plus || k < *min_plus) min_plus = k;
    });
    result.per_formula_min.push_back(min_plus);
    if (!min_plus)
      infinite = true;
    else
      best = std::max(best, *min_plus);
  }
  if (!infinite) result.k = best;
  return result;
}

// ---------------------------------------------------------------------------
// Pattern embedding: one complete description on B(0,R), R = m(rho*r + 1),
// that forces m scattered copies of the given descriptions. Sub-ball centers
// sit on the first axis, spaced 2(rho*r + 1) apart; every vertex of B(0,R)
// outside the sub-balls is black.

inline std::vector<int> embed_centers(int m, int r, int rho) {
  std::vector<int> centers(static_cast<std::size_t>(m));
  const int step = rho * r + 1;
  for (int i = 0; i < m; ++i)
    centers[static_cast<std::size_t>(i)] = -(m - 1) * step + 2 * i * step;
  return centers;
}

inline CompleteDescription embed_pattern(
    std::span<const CompleteDescription> descriptions,
    const TorusParams& geometry) {
  validate(geometry);
  if (descriptions.empty())
    throw config_error("embed_pattern needs at least one description");
  const auto& first_ball = *descriptions.front().ball();
  for (const auto& d : descriptions)
    if (d.ball()->radius != first_ball.radius ||
        d.ball()->d != geometry.d || d.ball()->norm_p != geometry.norm_p ||
        d.ball()->rho != geometry.rho)
      throw config_error("embed_pattern descriptions must share one geometry");

  const int m = static_cast<int>(descriptions.size());
  const int r = first_ball.radius;
  const int big_radius = m * (geometry.rho * r + 1);
  // Ball containment and sub-ball disjointness both need the big template to
  // exist on this torus.
  const auto big = ball_template(geometry, big_radius);
  const auto small = offset_ball(geometry.d, geometry.norm_p, geometry.rho, r);
  const auto centers = embed_centers(m, r, geometry.rho);

  CompleteDescription out(big, /*black=*/true);
  std::vector<int> delta(static_cast<std::size_t>(geometry.d));
  for (std::size_t j = 0; j < big->beta(); ++j) {
    const auto& y = big->offsets[j];
    for (int i = 0; i < m; ++i) {
      delta.assign(y.begin(), y.end());
      delta[0] -= centers[static_cast<std::size_t>(i)];
      const std::ptrdiff_t pos = small->find(delta);
      if (pos >= 0) {
        out.set(j, descriptions[static_cast<std::size_t>(i)].get(
                       static_cast<std::size_t>(pos)));
        break;  // sub-balls are disjoint, first hit decides
      }
    }
  }
  return out;
}

// True iff all pairwise torus graph distances exceed 2r.
inline bool distance_constraint_holds(const TorusParams& t,
                                      std::span<const Vertex> xs, int r) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      if (torus_distance(t, xs[i], xs[j]) <= 2 * r) return false;
  return true;
}

}  // namespace zofield
