#pragma once

// Algebraic expression engine for a priori constraint bodies and objectives:
// a small immutable AST, a recursive-descent parser with line/column
// diagnostics, an evaluator that faults on domain errors instead of
// propagating NaN, a renderer, and a linear-form analyzer used to recognize
// bound-shaped constraints.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <optional>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qrak/diagnostics.hpp"
#include "qrak/format.hpp"

namespace qrak {

struct SourcePos {
  int line = 0;
  int col = 0;
};

/// Thrown by evaluation when a value leaves the representable domain
/// (division by zero, log of a non-positive argument, non-finite
/// intermediates). Callers map this to an Unknown constraint result or an
/// infinite objective; it never escapes as a NaN.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& msg, SourcePos where = {})
      : std::runtime_error(msg), pos(where) {}
  SourcePos pos;
};

enum class ExprOp {
  Constant,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Abs,
  Exp,
  Log,
  Min,
  Max,
  Sum,  // sum(first .. last) over a declaration-contiguous variable range
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op = ExprOp::Constant;
  double value = 0.0;   // Constant
  std::string name;     // Var
  int index = -1;       // Var: resolved coordinate, -1 until resolution
  std::string range_first, range_last;            // Sum bounds by name
  int range_first_index = -1, range_last_index = -1;
  std::vector<ExprPtr> args;
  SourcePos pos;
};

inline ExprPtr make_const(double v, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Constant;
  e->value = v;
  e->pos = pos;
  return e;
}

inline ExprPtr make_var(std::string name, SourcePos pos = {}, int index = -1) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Var;
  e->name = std::move(name);
  e->index = index;
  e->pos = pos;
  return e;
}

inline ExprPtr make_node(ExprOp op, std::vector<ExprPtr> args, SourcePos pos = {}) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = std::move(args);
  e->pos = pos;
  return e;
}

// ---------------------------------------------------------------------------
// Lexer. Shared with the problem DSL, which parses relations and set
// literals around plain expressions.
// ---------------------------------------------------------------------------

namespace expr_detail {

enum class Tok {
  Number,
  Ident,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  Comma,
  DotDot,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Le,
  Ge,
  EqEq,
  Lt,
  Gt,
  Colon,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double num = 0.0;
  int col = 0;  // 1-based within the lexed string
};

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
inline bool digit(char c) { return c >= '0' && c <= '9'; }

/// Tokenizes `text`. Returns false (with a diagnostic) on an unexpected
/// character. `line` and `col_base` locate the string within its source file.
inline bool lex(std::string_view text, std::vector<Token>& out,
                std::vector<Diagnostic>& diags, int line, int col_base) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    const int col = static_cast<int>(i) + col_base;
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    if (c == '.' && i + 1 < n && text[i + 1] == '.') {
      out.push_back({Tok::DotDot, "..", 0.0, col});
      i += 2;
      continue;
    }
    if (digit(c) || (c == '.' && i + 1 < n && digit(text[i + 1]))) {
      // Let strtod consume the maximal numeric literal.
      std::string buf(text.substr(i));
      const char* begin = buf.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      const std::size_t used = static_cast<std::size_t>(end - begin);
      if (used == 0) {
        diags.push_back({Severity::Error, "ExprSyntax", "malformed number", line, col});
        return false;
      }
      out.push_back({Tok::Number, buf.substr(0, used), v, col});
      i += used;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < n && ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), 0.0, col});
      i = j;
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < n && text[i + 1] == b; };
    if (two('<', '=')) { out.push_back({Tok::Le, "<=", 0.0, col}); i += 2; continue; }
    if (two('>', '=')) { out.push_back({Tok::Ge, ">=", 0.0, col}); i += 2; continue; }
    if (two('=', '=')) { out.push_back({Tok::EqEq, "==", 0.0, col}); i += 2; continue; }
    switch (c) {
      case '+': out.push_back({Tok::Plus, "+", 0.0, col}); break;
      case '-': out.push_back({Tok::Minus, "-", 0.0, col}); break;
      case '*': out.push_back({Tok::Star, "*", 0.0, col}); break;
      case '/': out.push_back({Tok::Slash, "/", 0.0, col}); break;
      case '^': out.push_back({Tok::Caret, "^", 0.0, col}); break;
      case '(': out.push_back({Tok::LParen, "(", 0.0, col}); break;
      case ')': out.push_back({Tok::RParen, ")", 0.0, col}); break;
      case ',': out.push_back({Tok::Comma, ",", 0.0, col}); break;
      case '{': out.push_back({Tok::LBrace, "{", 0.0, col}); break;
      case '}': out.push_back({Tok::RBrace, "}", 0.0, col}); break;
      case '[': out.push_back({Tok::LBracket, "[", 0.0, col}); break;
      case ']': out.push_back({Tok::RBracket, "]", 0.0, col}); break;
      case '<': out.push_back({Tok::Lt, "<", 0.0, col}); break;
      case '>': out.push_back({Tok::Gt, ">", 0.0, col}); break;
      case ':': out.push_back({Tok::Colon, ":", 0.0, col}); break;
      case '=': out.push_back({Tok::EqEq, "=", 0.0, col}); break;
      default:
        diags.push_back({Severity::Error, "ExprSyntax",
                         std::string("unexpected character '") + c + "'", line, col});
        return false;
    }
    ++i;
  }
  out.push_back({Tok::End, "", 0.0, static_cast<int>(n) + col_base});
  return true;
}

/// Recursive-descent expression parser over a lexed token stream. The DSL
/// layer drives it directly so it can stop at a relational operator or the
/// `in` keyword and take over.
class Parser {
 public:
  Parser(const std::vector<Token>& toks, int line, std::vector<Diagnostic>& diags)
      : toks_(toks), line_(line), diags_(diags) {}

  const Token& peek() const { return toks_[pos_]; }
  const Token& peek2() const {
    return pos_ + 1 < toks_.size() ? toks_[pos_ + 1] : toks_.back();
  }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  std::size_t cursor() const { return pos_; }

  void error(const std::string& msg, const Token& at) {
    diags_.push_back({Severity::Error, "ExprSyntax", msg, line_, at.col});
    failed_ = true;
  }
  bool failed() const { return failed_; }

  /// expression := term (('+'|'-') term)*
  ExprPtr parse_expression() {
    ExprPtr lhs = parse_term();
    if (!lhs) return nullptr;
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token op = peek();
      advance();
      ExprPtr rhs = parse_term();
      if (!rhs) return nullptr;
      lhs = make_node(op.kind == Tok::Plus ? ExprOp::Add : ExprOp::Sub, {lhs, rhs},
                      {line_, op.col});
    }
    return lhs;
  }

 private:
  ExprPtr parse_term() {
    ExprPtr lhs = parse_unary();
    if (!lhs) return nullptr;
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Token op = peek();
      advance();
      ExprPtr rhs = parse_unary();
      if (!rhs) return nullptr;
      lhs = make_node(op.kind == Tok::Star ? ExprOp::Mul : ExprOp::Div, {lhs, rhs},
                      {line_, op.col});
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (peek().kind == Tok::Minus) {
      const Token op = peek();
      advance();
      ExprPtr inner = parse_unary();
      if (!inner) return nullptr;
      return make_node(ExprOp::Neg, {inner}, {line_, op.col});
    }
    return parse_power();
  }

  // Right-associative: a^b^c == a^(b^c).
  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (!base) return nullptr;
    if (peek().kind == Tok::Caret) {
      const Token op = peek();
      advance();
      ExprPtr exponent = (peek().kind == Tok::Minus) ? parse_unary() : parse_power();
      if (!exponent) return nullptr;
      return make_node(ExprOp::Pow, {base, exponent}, {line_, op.col});
    }
    return base;
  }

  ExprPtr parse_primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number:
        advance();
        return make_const(t.num, {line_, t.col});
      case Tok::LParen: {
        advance();
        ExprPtr inner = parse_expression();
        if (!inner) return nullptr;
        if (peek().kind != Tok::RParen) {
          error("expected ')'", peek());
          return nullptr;
        }
        advance();
        return inner;
      }
      case Tok::Ident: {
        if (peek2().kind == Tok::LParen) return parse_call();
        advance();
        return make_var(t.text, {line_, t.col});
      }
      default:
        error("expected a number, variable, function call, or '('", t);
        return nullptr;
    }
  }

  ExprPtr parse_call() {
    const Token name = peek();
    advance();  // ident
    advance();  // '('
    const SourcePos pos{line_, name.col};

    if (name.text == "sum") {
      // sum(first .. last): a contiguous variable range by declaration order.
      if (peek().kind != Tok::Ident) {
        error("sum expects 'sum(first .. last)' over variable names", peek());
        return nullptr;
      }
      const Token first = peek();
      advance();
      if (peek().kind != Tok::DotDot) {
        error("expected '..' in sum range", peek());
        return nullptr;
      }
      advance();
      if (peek().kind != Tok::Ident) {
        error("expected a variable name after '..'", peek());
        return nullptr;
      }
      const Token last = peek();
      advance();
      if (peek().kind != Tok::RParen) {
        error("expected ')'", peek());
        return nullptr;
      }
      advance();
      auto e = std::make_shared<Expr>();
      e->op = ExprOp::Sum;
      e->range_first = first.text;
      e->range_last = last.text;
      e->pos = pos;
      return e;
    }

    std::vector<ExprPtr> args;
    if (peek().kind != Tok::RParen) {
      while (true) {
        ExprPtr a = parse_expression();
        if (!a) return nullptr;
        args.push_back(a);
        if (peek().kind == Tok::Comma) {
          advance();
          continue;
        }
        break;
      }
    }
    if (peek().kind != Tok::RParen) {
      error("expected ')'", peek());
      return nullptr;
    }
    advance();

    auto arity_error = [&](const char* expect) {
      diags_.push_back({Severity::Error, "Arity",
                        name.text + " expects " + expect + ", got " +
                            std::to_string(args.size()) + " argument(s)",
                        line_, name.col});
      failed_ = true;
      return nullptr;
    };

    if (name.text == "abs") {
      if (args.size() != 1) return arity_error("1");
      return make_node(ExprOp::Abs, std::move(args), pos);
    }
    if (name.text == "exp") {
      if (args.size() != 1) return arity_error("1");
      return make_node(ExprOp::Exp, std::move(args), pos);
    }
    if (name.text == "log") {
      if (args.size() != 1) return arity_error("1");
      return make_node(ExprOp::Log, std::move(args), pos);
    }
    if (name.text == "pow") {
      if (args.size() != 2) return arity_error("2");
      return make_node(ExprOp::Pow, std::move(args), pos);
    }
    if (name.text == "min") {
      if (args.size() < 2) return arity_error("at least 2");
      return make_node(ExprOp::Min, std::move(args), pos);
    }
    if (name.text == "max") {
      if (args.size() < 2) return arity_error("at least 2");
      return make_node(ExprOp::Max, std::move(args), pos);
    }
    diags_.push_back({Severity::Error, "UnknownFunction",
                      "unknown function '" + name.text + "'", line_, name.col});
    failed_ = true;
    return nullptr;
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  int line_;
  std::vector<Diagnostic>& diags_;
  bool failed_ = false;
};

}  // namespace expr_detail

// ---------------------------------------------------------------------------
// Public parse entry point (whole-string expressions).
// ---------------------------------------------------------------------------

struct ExprParse {
  ExprPtr ast;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return ast != nullptr && !has_errors(diagnostics); }
};

/// Parses a standalone arithmetic expression. `where` locates the string in
/// its enclosing file for diagnostics (line, and the column of the string's
/// first character).
inline ExprParse parse_expression(std::string_view text, SourcePos where = {1, 1}) {
  ExprParse out;
  std::vector<expr_detail::Token> toks;
  if (!expr_detail::lex(text, toks, out.diagnostics, where.line, where.col)) return out;
  expr_detail::Parser p(toks, where.line, out.diagnostics);
  ExprPtr ast = p.parse_expression();
  if (!ast) return out;
  if (!p.at_end()) {
    out.diagnostics.push_back({Severity::Error, "ExprSyntax",
                               "unexpected trailing input '" + p.peek().text + "'",
                               where.line, p.peek().col});
    return out;
  }
  out.ast = ast;
  return out;
}

// ---------------------------------------------------------------------------
// Resolution against a variable table.
// ---------------------------------------------------------------------------

/// Rebuilds the tree with variable references bound to coordinate indices.
/// Unknown names and bad sum ranges produce diagnostics; the returned tree
/// keeps -1 indices in that case.
inline ExprPtr resolve_vars(const ExprPtr& e,
                            const std::unordered_map<std::string, int>& index_of,
                            std::vector<Diagnostic>& diags) {
  if (!e) return e;
  auto copy = std::make_shared<Expr>(*e);
  if (e->op == ExprOp::Var) {
    auto it = index_of.find(e->name);
    if (it == index_of.end()) {
      diags.push_back({Severity::Error, "UnknownVariable",
                       "unknown variable '" + e->name + "'", e->pos.line, e->pos.col});
    } else {
      copy->index = it->second;
    }
    return copy;
  }
  if (e->op == ExprOp::Sum) {
    auto fi = index_of.find(e->range_first);
    auto li = index_of.find(e->range_last);
    if (fi == index_of.end()) {
      diags.push_back({Severity::Error, "UnknownVariable",
                       "unknown variable '" + e->range_first + "'", e->pos.line, e->pos.col});
    }
    if (li == index_of.end()) {
      diags.push_back({Severity::Error, "UnknownVariable",
                       "unknown variable '" + e->range_last + "'", e->pos.line, e->pos.col});
    }
    if (fi != index_of.end() && li != index_of.end()) {
      if (fi->second > li->second) {
        diags.push_back({Severity::Error, "BadSumRange",
                         "sum range '" + e->range_first + " .. " + e->range_last +
                             "' is reversed in declaration order",
                         e->pos.line, e->pos.col});
      } else {
        copy->range_first_index = fi->second;
        copy->range_last_index = li->second;
      }
    }
    return copy;
  }
  for (auto& a : copy->args) a = resolve_vars(a, index_of, diags);
  return copy;
}

inline bool expr_is_resolved(const Expr& e) {
  if (e.op == ExprOp::Var) return e.index >= 0;
  if (e.op == ExprOp::Sum) return e.range_first_index >= 0 && e.range_last_index >= 0;
  for (const auto& a : e.args)
    if (!expr_is_resolved(*a)) return false;
  return true;
}

inline void collect_vars(const Expr& e, std::set<std::string>& names) {
  if (e.op == ExprOp::Var) names.insert(e.name);
  if (e.op == ExprOp::Sum) {
    names.insert(e.range_first);
    names.insert(e.range_last);
  }
  for (const auto& a : e.args) collect_vars(*a, names);
}

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

inline double eval_expr(const Expr& e, std::span<const double> x) {
  auto finite_or_throw = [&](double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what), e.pos);
    return v;
  };
  switch (e.op) {
    case ExprOp::Constant:
      return e.value;
    case ExprOp::Var:
      if (e.index < 0) throw std::logic_error("evaluating unresolved variable '" + e.name + "'");
      if (static_cast<std::size_t>(e.index) >= x.size())
        throw std::logic_error("variable index out of range");
      return x[static_cast<std::size_t>(e.index)];
    case ExprOp::Add:
      return finite_or_throw(eval_expr(*e.args[0], x) + eval_expr(*e.args[1], x),
                             "non-finite result in addition");
    case ExprOp::Sub:
      return finite_or_throw(eval_expr(*e.args[0], x) - eval_expr(*e.args[1], x),
                             "non-finite result in subtraction");
    case ExprOp::Mul:
      return finite_or_throw(eval_expr(*e.args[0], x) * eval_expr(*e.args[1], x),
                             "non-finite result in multiplication");
    case ExprOp::Div: {
      const double denom = eval_expr(*e.args[1], x);
      if (denom == 0.0) throw DomainError("division by zero", e.pos);
      return finite_or_throw(eval_expr(*e.args[0], x) / denom, "non-finite result in division");
    }
    case ExprOp::Pow: {
      const double b = eval_expr(*e.args[0], x);
      const double p = eval_expr(*e.args[1], x);
      const double v = std::pow(b, p);
      if (std::isnan(v)) throw DomainError("invalid power (negative base, fractional exponent)", e.pos);
      return finite_or_throw(v, "non-finite result in power");
    }
    case ExprOp::Neg:
      return -eval_expr(*e.args[0], x);
    case ExprOp::Abs:
      return std::fabs(eval_expr(*e.args[0], x));
    case ExprOp::Exp:
      return finite_or_throw(std::exp(eval_expr(*e.args[0], x)), "non-finite result in exp");
    case ExprOp::Log: {
      const double a = eval_expr(*e.args[0], x);
      if (a <= 0.0) throw DomainError("log of a non-positive argument", e.pos);
      return std::log(a);
    }
    case ExprOp::Min: {
      double v = eval_expr(*e.args[0], x);
      for (std::size_t i = 1; i < e.args.size(); ++i) v = std::min(v, eval_expr(*e.args[i], x));
      return v;
    }
    case ExprOp::Max: {
      double v = eval_expr(*e.args[0], x);
      for (std::size_t i = 1; i < e.args.size(); ++i) v = std::max(v, eval_expr(*e.args[i], x));
      return v;
    }
    case ExprOp::Sum: {
      if (e.range_first_index < 0 || e.range_last_index < 0)
        throw std::logic_error("evaluating unresolved sum range");
      double v = 0.0;
      for (int i = e.range_first_index; i <= e.range_last_index; ++i) {
        if (static_cast<std::size_t>(i) >= x.size())
          throw std::logic_error("sum index out of range");
        v += x[static_cast<std::size_t>(i)];
      }
      return finite_or_throw(v, "non-finite result in sum");
    }
  }
  throw std::logic_error("unhandled expression node");
}

inline double eval_expr(const ExprPtr& e, std::span<const double> x) { return eval_expr(*e, x); }

// ---------------------------------------------------------------------------
// Rendering (minimal parentheses; stable under reparsing).
// ---------------------------------------------------------------------------

namespace expr_detail {

inline int precedence(const Expr& e) {
  switch (e.op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    case ExprOp::Pow: return 4;
    default: return 5;
  }
}

inline void render(const Expr& e, std::string& out) {
  auto child = [&](const Expr& c, int min_prec) {
    if (precedence(c) < min_prec) {
      out += '(';
      render(c, out);
      out += ')';
    } else {
      render(c, out);
    }
  };
  switch (e.op) {
    case ExprOp::Constant:
      if (e.value < 0) {
        out += '(';
        out += format_double(e.value);
        out += ')';
      } else {
        out += format_double(e.value);
      }
      return;
    case ExprOp::Var:
      out += e.name;
      return;
    case ExprOp::Add:
      child(*e.args[0], 1);
      out += " + ";
      child(*e.args[1], 2);
      return;
    case ExprOp::Sub:
      child(*e.args[0], 1);
      out += " - ";
      child(*e.args[1], 2);
      return;
    case ExprOp::Mul:
      child(*e.args[0], 2);
      out += "*";
      child(*e.args[1], 3);
      return;
    case ExprOp::Div:
      child(*e.args[0], 2);
      out += "/";
      child(*e.args[1], 3);
      return;
    case ExprOp::Neg:
      out += '-';
      child(*e.args[0], 3);
      return;
    case ExprOp::Pow:
      child(*e.args[0], 5);
      out += '^';
      child(*e.args[1], 4);
      return;
    case ExprOp::Abs:
    case ExprOp::Exp:
    case ExprOp::Log:
    case ExprOp::Min:
    case ExprOp::Max: {
      out += e.op == ExprOp::Abs   ? "abs"
             : e.op == ExprOp::Exp ? "exp"
             : e.op == ExprOp::Log ? "log"
             : e.op == ExprOp::Min ? "min"
                                   : "max";
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        render(*e.args[i], out);
      }
      out += ')';
      return;
    }
    case ExprOp::Sum:
      out += "sum(";
      out += e.range_first;
      out += " .. ";
      out += e.range_last;
      out += ')';
      return;
  }
}

}  // namespace expr_detail

inline std::string render_expression(const Expr& e) {
  std::string out;
  expr_detail::render(e, out);
  return out;
}
inline std::string render_expression(const ExprPtr& e) { return render_expression(*e); }

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case ExprOp::Constant: return a.value == b.value;
    case ExprOp::Var: return a.name == b.name;
    case ExprOp::Sum: return a.range_first == b.range_first && a.range_last == b.range_last;
    default: break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!expr_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Linear-form analysis: recognizes bodies of the shape a·x + b so that
// single-variable inequalities can be treated as bounds.
// ---------------------------------------------------------------------------

struct LinearForm {
  std::map<int, double> coeffs;  // coordinate index -> coefficient
  double constant = 0.0;

  bool is_constant() const { return coeffs.empty(); }
  std::optional<std::pair<int, double>> single_variable() const {
    if (coeffs.size() != 1) return std::nullopt;
    return std::make_pair(coeffs.begin()->first, coeffs.begin()->second);
  }
};

/// Returns the linear form of a resolved tree, or nullopt when the body is
/// nonlinear. Constant subtrees (of any shape with a defined value) fold.
inline std::optional<LinearForm> linear_form(const Expr& e) {
  auto fold_constant = [](const Expr& n) -> std::optional<double> {
    std::set<std::string> names;
    collect_vars(n, names);
    if (!names.empty()) return std::nullopt;
    try {
      return eval_expr(n, std::span<const double>{});
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };

  switch (e.op) {
    case ExprOp::Constant:
      return LinearForm{{}, e.value};
    case ExprOp::Var: {
      if (e.index < 0) return std::nullopt;
      LinearForm f;
      f.coeffs[e.index] = 1.0;
      return f;
    }
    case ExprOp::Add:
    case ExprOp::Sub: {
      auto l = linear_form(*e.args[0]);
      auto r = linear_form(*e.args[1]);
      if (!l || !r) return std::nullopt;
      const double sign = e.op == ExprOp::Add ? 1.0 : -1.0;
      for (const auto& [i, c] : r->coeffs) {
        l->coeffs[i] += sign * c;
        if (l->coeffs[i] == 0.0) l->coeffs.erase(i);
      }
      l->constant += sign * r->constant;
      return l;
    }
    case ExprOp::Neg: {
      auto f = linear_form(*e.args[0]);
      if (!f) return std::nullopt;
      for (auto& [i, c] : f->coeffs) c = -c;
      f->constant = -f->constant;
      return f;
    }
    case ExprOp::Mul: {
      auto l = linear_form(*e.args[0]);
      auto r = linear_form(*e.args[1]);
      if (l && l->is_constant() && r) {
        for (auto& [i, c] : r->coeffs) c *= l->constant;
        r->constant *= l->constant;
        if (l->constant == 0.0) r->coeffs.clear();
        return r;
      }
      if (r && r->is_constant() && l) {
        for (auto& [i, c] : l->coeffs) c *= r->constant;
        l->constant *= r->constant;
        if (r->constant == 0.0) l->coeffs.clear();
        return l;
      }
      return std::nullopt;
    }
    case ExprOp::Div: {
      auto l = linear_form(*e.args[0]);
      auto r = linear_form(*e.args[1]);
      if (l && r && r->is_constant() && r->constant != 0.0) {
        for (auto& [i, c] : l->coeffs) c /= r->constant;
        l->constant /= r->constant;
        return l;
      }
      return std::nullopt;
    }
    case ExprOp::Sum: {
      if (e.range_first_index < 0 || e.range_last_index < 0) return std::nullopt;
      LinearForm f;
      for (int i = e.range_first_index; i <= e.range_last_index; ++i) f.coeffs[i] = 1.0;
      return f;
    }
    default: {
      if (auto v = fold_constant(e)) return LinearForm{{}, *v};
      return std::nullopt;
    }
  }
}

}  // namespace qrak
