#pragma once

// Line-oriented problem description language:
//
//   # comment
//   problem truss
//   var x1 real [0, 10]
//   var n int [1, 8]
//   var flag bin
//   var compiler cat {gcc, icc}
//   simulation sty cmd "./styrene {1} {2}" outputs 5 timeout 10
//   minimize "x1 + x2"            # or "sty:out 1"
//   constraint budget QRAK "sum(x1 .. x2) <= 100" tol 1e-6
//   constraint press QRSK "sty:out 2 <= 0" detail feasibility
//   constraint seg   NUSK "sty:errcode 139"
//   constraint wall  QUSK "sty:time"
//
// Quoted bodies hold one relation ("<=", ">=", "=", "<", ">"), a membership
// test ("x in {0,1}", "x in [0, 2]", "c in {gcc, icc}"), or — for minimize —
// a bare expression. Bodies normalize to c(x) <= 0 / c(x) = 0 at parse time;
// ">=" is rewritten by negation. Declarations may appear in any order; names
// resolve after the whole file is read.

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qrak/problem.hpp"

namespace qrak {

struct ProblemParse {
  std::optional<ProblemInstance> instance;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return instance.has_value() && !has_errors(diagnostics); }
};

namespace dsl_detail {

struct LineTok {
  enum class Kind { Word, String, LBrace, RBrace, LBracket, RBracket, Comma };
  Kind kind;
  std::string text;
  int col = 0;  // 1-based; for String, the opening quote
};

inline bool tokenize_line(const std::string& line, int lineno, std::vector<LineTok>& out,
                          std::vector<Diagnostic>& diags) {
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;  // comment to end of line
    const int col = static_cast<int>(i) + 1;
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < n && line[j] != '"') ++j;
      if (j >= n) {
        diags.push_back({Severity::Error, "ParseError", "unterminated string", lineno, col});
        return false;
      }
      out.push_back({LineTok::Kind::String, line.substr(i + 1, j - i - 1), col});
      i = j + 1;
      continue;
    }
    auto punct = [&](LineTok::Kind k, const char* t) {
      out.push_back({k, t, col});
      ++i;
    };
    if (c == '{') { punct(LineTok::Kind::LBrace, "{"); continue; }
    if (c == '}') { punct(LineTok::Kind::RBrace, "}"); continue; }
    if (c == '[') { punct(LineTok::Kind::LBracket, "["); continue; }
    if (c == ']') { punct(LineTok::Kind::RBracket, "]"); continue; }
    if (c == ',') { punct(LineTok::Kind::Comma, ","); continue; }
    std::size_t j = i;
    while (j < n) {
      const char d = line[j];
      if (d == ' ' || d == '\t' || d == '\r' || d == '#' || d == '"' || d == '{' || d == '}' ||
          d == '[' || d == ']' || d == ',')
        break;
      ++j;
    }
    out.push_back({LineTok::Kind::Word, line.substr(i, j - i), col});
    i = j;
  }
  return true;
}

inline std::optional<double> parse_number(const std::string& text) {
  const char* b = text.c_str();
  char* e = nullptr;
  const double v = std::strtod(b, &e);
  if (e == b || *e != '\0') return std::nullopt;
  return v;
}

// The parsed form of one quoted body.
struct Body {
  bool is_sim = false;
  SimBinding binding;            // is_sim; binding kind mirrored in `kind`
  ExprPtr expr;                  // !is_sim (normalized lhs - rhs); null only on error
  ConstraintKind kind = ConstraintKind::Inequality;
  MemberSet member_set;
  bool bare_expression = false;  // no relation present (valid for minimize only)
};

inline ExprPtr sub_folded(ExprPtr a, ExprPtr b, SourcePos pos) {
  if (b->op == ExprOp::Constant && b->value == 0.0) return a;
  if (a->op == ExprOp::Constant && a->value == 0.0) return make_node(ExprOp::Neg, {b}, pos);
  return make_node(ExprOp::Sub, {a, b}, pos);
}

/// Parses the contents of a quoted body. `where` is the position of the
/// first character inside the quotes.
inline std::optional<Body> parse_body(const std::string& text, SourcePos where,
                                      std::vector<Diagnostic>& diags) {
  using expr_detail::Tok;
  std::vector<expr_detail::Token> toks;
  if (!expr_detail::lex(text, toks, diags, where.line, where.col)) return std::nullopt;

  Body body;

  // Simulation binding: "<sim>:out k [rel num]" | "<sim>:time" | "<sim>:errcode k".
  if (toks.size() >= 2 && toks[0].kind == Tok::Ident && toks[1].kind == Tok::Colon) {
    body.is_sim = true;
    body.binding.sim = toks[0].text;
    std::size_t i = 2;
    auto fail = [&](const std::string& msg, int col) {
      diags.push_back({Severity::Error, "ParseError", msg, where.line, col});
      return std::nullopt;
    };
    if (i >= toks.size() || toks[i].kind != Tok::Ident)
      return fail("expected 'out', 'time', or 'errcode' after ':'",
                  i < toks.size() ? toks[i].col : where.col);
    const std::string what = toks[i].text;
    ++i;
    if (what == "time") {
      body.binding.source = SimSource::Elapsed;
      body.kind = ConstraintKind::Inequality;
      body.bare_expression = true;  // the implied relation is elapsed <= timeout
      if (toks[i].kind != Tok::End) return fail("unexpected input after 'time'", toks[i].col);
      return body;
    }
    if (what == "errcode") {
      body.binding.source = SimSource::ErrorFlag;
      body.kind = ConstraintKind::Inequality;
      body.bare_expression = true;  // violated exactly when the code fires
      if (i >= toks.size() || toks[i].kind != Tok::Number)
        return fail("expected an exit code after 'errcode'",
                    i < toks.size() ? toks[i].col : where.col);
      body.binding.error_code = static_cast<int>(toks[i].num);
      ++i;
      if (toks[i].kind != Tok::End) return fail("unexpected input after exit code", toks[i].col);
      return body;
    }
    if (what != "out")
      return fail("expected 'out', 'time', or 'errcode' after ':'", toks[i - 1].col);
    body.binding.source = SimSource::Output;
    if (i >= toks.size() || toks[i].kind != Tok::Number)
      return fail("expected an output index after 'out'",
                  i < toks.size() ? toks[i].col : where.col);
    body.binding.output_index = static_cast<int>(toks[i].num) - 1;  // written 1-based
    ++i;
    if (toks[i].kind == Tok::End) {
      body.bare_expression = true;  // objective form "sim:out k"
      return body;
    }
    const Tok rel = toks[i].kind;
    if (rel != Tok::Le && rel != Tok::Ge && rel != Tok::EqEq && rel != Tok::Lt &&
        rel != Tok::Gt)
      return fail("expected a relation after the output reference", toks[i].col);
    ++i;
    double sign = 1.0;
    if (i < toks.size() && toks[i].kind == Tok::Minus) {
      sign = -1.0;
      ++i;
    }
    if (i >= toks.size() || toks[i].kind != Tok::Number)
      return fail("expected a constant on the right of the relation",
                  i < toks.size() ? toks[i].col : where.col);
    body.binding.rhs = sign * toks[i].num;
    ++i;
    if (toks[i].kind != Tok::End) return fail("unexpected trailing input", toks[i].col);
    body.kind = (rel == Tok::EqEq) ? ConstraintKind::Equality : ConstraintKind::Inequality;
    body.binding.flipped = (rel == Tok::Ge || rel == Tok::Gt);
    return body;
  }

  // A priori body: expression [relation expression | 'in' set].
  expr_detail::Parser p(toks, where.line, diags);
  ExprPtr lhs = p.parse_expression();
  if (!lhs) return std::nullopt;

  const auto& next = p.peek();
  if (next.kind == Tok::End) {
    body.expr = lhs;
    body.bare_expression = true;
    return body;
  }

  if (next.kind == Tok::Ident && next.text == "in") {
    p.advance();
    body.kind = ConstraintKind::SetMembership;
    body.expr = lhs;
    const auto& open = p.peek();
    auto fail = [&](const std::string& msg, int col) {
      diags.push_back({Severity::Error, "ParseError", msg, where.line, col});
      return std::nullopt;
    };
    if (open.kind == Tok::LBracket) {
      p.advance();
      auto read_signed = [&]() -> std::optional<double> {
        double sign = 1.0;
        if (p.peek().kind == Tok::Minus) {
          sign = -1.0;
          p.advance();
        }
        if (p.peek().kind != Tok::Number) return std::nullopt;
        const double v = sign * p.peek().num;
        p.advance();
        return v;
      };
      auto lo = read_signed();
      if (!lo) return fail("expected the interval lower endpoint", p.peek().col);
      if (p.peek().kind != Tok::Comma) return fail("expected ',' in interval", p.peek().col);
      p.advance();
      auto hi = read_signed();
      if (!hi) return fail("expected the interval upper endpoint", p.peek().col);
      if (p.peek().kind != Tok::RBracket) return fail("expected ']'", p.peek().col);
      p.advance();
      if (p.peek().kind != Tok::End) return fail("unexpected trailing input", p.peek().col);
      if (*lo > *hi) return fail("interval endpoints are reversed", open.col);
      body.member_set = Interval{*lo, *hi};
      return body;
    }
    if (open.kind != Tok::LBrace) return fail("expected '{' or '[' after 'in'", open.col);
    p.advance();
    NumericSet nums;
    LabelSet labels;
    bool numeric = false, labelled = false;
    while (true) {
      if (p.peek().kind == Tok::Minus || p.peek().kind == Tok::Number) {
        double sign = 1.0;
        if (p.peek().kind == Tok::Minus) {
          sign = -1.0;
          p.advance();
          if (p.peek().kind != Tok::Number)
            return fail("expected a number after '-'", p.peek().col);
        }
        nums.values.push_back(sign * p.peek().num);
        numeric = true;
        p.advance();
      } else if (p.peek().kind == Tok::Ident) {
        labels.labels.push_back(p.peek().text);
        labelled = true;
        p.advance();
      } else {
        return fail("expected a number or label in set", p.peek().col);
      }
      if (p.peek().kind == Tok::Comma) {
        p.advance();
        continue;
      }
      break;
    }
    if (p.peek().kind != Tok::RBrace) return fail("expected '}'", p.peek().col);
    p.advance();
    if (p.peek().kind != Tok::End) return fail("unexpected trailing input", p.peek().col);
    if (numeric && labelled) return fail("set mixes numbers and labels", open.col);
    if (numeric) body.member_set = nums;
    else body.member_set = labels;
    return body;
  }

  if (next.kind == Tok::Le || next.kind == Tok::Ge || next.kind == Tok::EqEq ||
      next.kind == Tok::Lt || next.kind == Tok::Gt) {
    const Tok rel = next.kind;
    const SourcePos relpos{where.line, next.col};
    p.advance();
    ExprPtr rhs = p.parse_expression();
    if (!rhs) return std::nullopt;
    if (!p.at_end()) {
      diags.push_back({Severity::Error, "ExprSyntax",
                       "unexpected trailing input '" + p.peek().text + "'", where.line,
                       p.peek().col});
      return std::nullopt;
    }
    if (rel == Tok::Ge || rel == Tok::Gt) {
      body.expr = sub_folded(rhs, lhs, relpos);
      body.kind = ConstraintKind::Inequality;
    } else {
      body.expr = sub_folded(lhs, rhs, relpos);
      body.kind = (rel == Tok::EqEq) ? ConstraintKind::Equality : ConstraintKind::Inequality;
    }
    return body;
  }

  diags.push_back({Severity::Error, "ParseError",
                   "expected a relation or 'in' after the expression", where.line, next.col});
  return std::nullopt;
}

inline std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> argv;
  std::istringstream in(cmd);
  std::string w;
  while (in >> w) argv.push_back(w);
  return argv;
}

}  // namespace dsl_detail

/// Parses a problem description, resolves every name, and runs semantic
/// validation. The returned diagnostics aggregate all three phases; an
/// instance is returned whenever the text was structurally readable, so
/// tooling can still classify and advise on files that fail validation.
inline ProblemParse parse_problem(std::string_view text) {
  using dsl_detail::LineTok;
  ProblemParse out;
  ProblemInstance inst;
  bool saw_problem_line = false;
  bool structural_failure = false;

  struct PendingBody {
    std::string text;
    SourcePos where;
  };
  std::optional<PendingBody> objective_body;
  std::vector<PendingBody> constraint_bodies;  // parallel to inst.constraints

  auto err = [&](std::string code, std::string msg, int line, int col) {
    out.diagnostics.push_back({Severity::Error, std::move(code), std::move(msg), line, col});
  };

  std::istringstream stream{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    std::vector<LineTok> toks;
    if (!dsl_detail::tokenize_line(line, lineno, toks, out.diagnostics)) {
      structural_failure = true;
      continue;
    }
    if (toks.empty()) continue;
    if (toks[0].kind != LineTok::Kind::Word) {
      err("ParseError", "expected a directive", lineno, toks[0].col);
      structural_failure = true;
      continue;
    }
    const std::string& head = toks[0].text;

    auto word_at = [&](std::size_t i) -> const std::string* {
      if (i < toks.size() && toks[i].kind == LineTok::Kind::Word) return &toks[i].text;
      return nullptr;
    };
    auto fail_line = [&](const std::string& msg, std::size_t i) {
      const int col = i < toks.size() ? toks[i].col : static_cast<int>(line.size()) + 1;
      err("ParseError", msg, lineno, col);
      structural_failure = true;
    };

    if (head == "problem") {
      if (saw_problem_line) {
        fail_line("duplicate problem line", 0);
        continue;
      }
      const std::string* name = word_at(1);
      if (!name || toks.size() != 2) {
        fail_line("expected: problem <name>", 1);
        continue;
      }
      inst.name = *name;
      saw_problem_line = true;
      continue;
    }

    if (head == "var") {
      const std::string* name = word_at(1);
      const std::string* kindw = word_at(2);
      if (!name || !kindw) {
        fail_line("expected: var <name> real|int|bin|cat ...", 1);
        continue;
      }
      Variable v;
      v.name = *name;
      std::size_t i = 3;
      if (*kindw == "real" || *kindw == "int") {
        v.kind = *kindw == "real" ? VarKind::Real : VarKind::Integer;
        if (i < toks.size()) {
          if (toks[i].kind != LineTok::Kind::LBracket || toks.size() < i + 5 ||
              toks[i + 2].kind != LineTok::Kind::Comma ||
              toks[i + 4].kind != LineTok::Kind::RBracket) {
            fail_line("expected bounds: [lo, hi]", i);
            continue;
          }
          auto lo = word_at(i + 1) ? dsl_detail::parse_number(*word_at(i + 1)) : std::nullopt;
          auto hi = word_at(i + 3) ? dsl_detail::parse_number(*word_at(i + 3)) : std::nullopt;
          if (!lo || !hi) {
            fail_line("bounds must be numbers", i + 1);
            continue;
          }
          v.lower = *lo;
          v.upper = *hi;
          i += 5;
        }
      } else if (*kindw == "bin") {
        v.kind = VarKind::Binary;
        v.lower = 0.0;
        v.upper = 1.0;
      } else if (*kindw == "cat") {
        v.kind = VarKind::Categorical;
        if (i >= toks.size() || toks[i].kind != LineTok::Kind::LBrace) {
          fail_line("expected categories: {a, b, ...}", i);
          continue;
        }
        ++i;
        bool bad = false;
        while (i < toks.size() && toks[i].kind != LineTok::Kind::RBrace) {
          if (toks[i].kind == LineTok::Kind::Comma) {
            ++i;
            continue;
          }
          if (toks[i].kind != LineTok::Kind::Word) {
            fail_line("category names must be plain words", i);
            bad = true;
            break;
          }
          v.categories.push_back(toks[i].text);
          ++i;
        }
        if (bad) continue;
        if (i >= toks.size()) {
          fail_line("expected '}'", i);
          continue;
        }
        ++i;  // '}'
        v.lower = 0.0;
        v.upper = v.categories.empty() ? 0.0 : static_cast<double>(v.categories.size()) - 1;
      } else {
        fail_line("unknown variable kind '" + *kindw + "'", 2);
        continue;
      }
      if (i != toks.size()) {
        fail_line("unexpected trailing input", i);
        continue;
      }
      inst.variables.push_back(std::move(v));
      continue;
    }

    if (head == "simulation") {
      const std::string* id = word_at(1);
      if (!id) {
        fail_line("expected: simulation <id> cmd \"...\" outputs <n> [timeout <sec>]", 1);
        continue;
      }
      SimulationSpec spec;
      spec.id = *id;
      std::size_t i = 2;
      bool bad = false;
      bool saw_cmd = false, saw_outputs = false;
      while (i < toks.size()) {
        const std::string* kw = word_at(i);
        if (!kw) {
          fail_line("expected a keyword", i);
          bad = true;
          break;
        }
        if (*kw == "cmd") {
          if (i + 1 >= toks.size() || toks[i + 1].kind != LineTok::Kind::String) {
            fail_line("cmd expects a quoted command line", i + 1);
            bad = true;
            break;
          }
          spec.argv = dsl_detail::split_command(toks[i + 1].text);
          if (spec.argv.empty()) {
            fail_line("cmd is empty", i + 1);
            bad = true;
            break;
          }
          saw_cmd = true;
          i += 2;
        } else if (*kw == "outputs") {
          const std::string* n = word_at(i + 1);
          auto v = n ? dsl_detail::parse_number(*n) : std::nullopt;
          if (!v || *v < 0 || *v != static_cast<int>(*v)) {
            fail_line("outputs expects a nonnegative integer", i + 1);
            bad = true;
            break;
          }
          spec.output_arity = static_cast<int>(*v);
          saw_outputs = true;
          i += 2;
        } else if (*kw == "timeout") {
          const std::string* n = word_at(i + 1);
          auto v = n ? dsl_detail::parse_number(*n) : std::nullopt;
          if (!v || *v <= 0) {
            fail_line("timeout expects a positive number of seconds", i + 1);
            bad = true;
            break;
          }
          spec.timeout_seconds = *v;
          i += 2;
        } else {
          fail_line("unknown simulation keyword '" + *kw + "'", i);
          bad = true;
          break;
        }
      }
      if (bad) continue;
      if (!saw_cmd || !saw_outputs) {
        fail_line("simulation needs both cmd and outputs", 1);
        continue;
      }
      inst.simulations.push_back(std::move(spec));
      continue;
    }

    if (head == "minimize") {
      if (toks.size() != 2 || toks[1].kind != LineTok::Kind::String) {
        fail_line("expected: minimize \"<expression or sim:out k>\"", 1);
        continue;
      }
      if (objective_body) {
        fail_line("duplicate minimize line", 0);
        continue;
      }
      objective_body = PendingBody{toks[1].text, {lineno, toks[1].col + 1}};
      continue;
    }

    if (head == "constraint") {
      const std::string* name = word_at(1);
      const std::string* code = word_at(2);
      if (!name || !code || toks.size() < 4 || toks[3].kind != LineTok::Kind::String) {
        fail_line("expected: constraint <name> <CLASS> \"<body>\" [detail <d>] [tol <t>]", 1);
        continue;
      }

      auto parsed = parse_class_code(*code);
      ConstraintClass cls = class_from_code("QRAK");
      if (const auto* e = std::get_if<ClassCodeError>(&parsed)) {
        err(e->kind == ClassCodeError::Kind::Syntax ? "ParseError" : "InvalidClass",
            "constraint '" + *name + "': " + e->message, lineno, toks[2].col);
        structural_failure = true;
        continue;
      } else if (std::holds_alternative<ClassPattern>(parsed)) {
        err("AmbiguousClassPattern",
            "constraint '" + *name + "' declares the pattern '" +
                std::get<ClassPattern>(parsed).code() +
                "'; a declaration needs one concrete class",
            lineno, toks[2].col);
        structural_failure = true;
        continue;
      } else {
        cls = std::get<ConstraintClass>(parsed);
      }

      Constraint c;
      c.name = *name;
      c.cls = cls;

      std::size_t i = 4;
      bool bad = false;
      while (i < toks.size()) {
        const std::string* kw = word_at(i);
        if (kw && *kw == "tol") {
          const std::string* n = word_at(i + 1);
          auto v = n ? dsl_detail::parse_number(*n) : std::nullopt;
          if (!v) {
            fail_line("tol expects a number", i + 1);
            bad = true;
            break;
          }
          c.solution_tolerance = *v;
          i += 2;
        } else if (kw && *kw == "detail") {
          const std::string* d = word_at(i + 1);
          if (!d || (*d != "fully" && *d != "feasibility" && *d != "violation")) {
            fail_line("detail expects fully|feasibility|violation", i + 1);
            bad = true;
            break;
          }
          if (!c.cls.quantifiable()) {
            err("NonquantifiableDetail",
                "constraint '" + c.name + "' declares a quantifiable detail on class " +
                    c.cls.code(),
                lineno, toks[i].col);
          } else {
            c.cls = c.cls.with_detail(*d == "fully" ? QuantifiableDetail::Fully
                                      : *d == "feasibility" ? QuantifiableDetail::FeasibilityOnly
                                                            : QuantifiableDetail::ViolationOnly);
          }
          i += 2;
        } else {
          fail_line("unknown constraint keyword", i);
          bad = true;
          break;
        }
      }
      if (bad) continue;

      constraint_bodies.push_back({toks[3].text, {lineno, toks[3].col + 1}});
      inst.constraints.push_back(std::move(c));
      continue;
    }

    err("ParseError", "unknown directive '" + head + "'", lineno, toks[0].col);
    structural_failure = true;
  }

  if (!saw_problem_line)
    out.diagnostics.push_back({Severity::Error, "ParseError", "missing problem line", 1, 1});

  // --- Resolution: bind every body now that all names are known. ---
  std::unordered_map<std::string, int> index_of;
  for (std::size_t i = 0; i < inst.variables.size(); ++i)
    index_of.emplace(inst.variables[i].name, static_cast<int>(i));

  if (objective_body) {
    auto body = dsl_detail::parse_body(objective_body->text, objective_body->where,
                                       out.diagnostics);
    if (body) {
      if (body->is_sim) {
        if (!body->bare_expression) {
          err("ParseError", "the objective is a value, not a relation",
              objective_body->where.line, objective_body->where.col);
        } else {
          inst.objective_sim = body->binding;
        }
      } else if (!body->bare_expression) {
        err("ParseError", "the objective is a value, not a relation",
            objective_body->where.line, objective_body->where.col);
      } else {
        inst.objective = resolve_vars(body->expr, index_of, out.diagnostics);
      }
    }
  }

  for (std::size_t ci = 0; ci < constraint_bodies.size(); ++ci) {
    Constraint& c = inst.constraints[ci];
    const auto& pending = constraint_bodies[ci];
    auto body = dsl_detail::parse_body(pending.text, pending.where, out.diagnostics);
    if (!body) continue;
    if (body->bare_expression && !body->is_sim) {
      err("ParseError", "constraint '" + c.name + "' needs a relation or 'in'",
          pending.where.line, pending.where.col);
      continue;
    }
    c.kind = body->kind;
    if (body->is_sim) {
      if (body->bare_expression && body->binding.source == SimSource::Output) {
        err("ParseError", "constraint '" + c.name + "' needs a relation on the output",
            pending.where.line, pending.where.col);
        continue;
      }
      c.sim = body->binding;
      continue;
    }
    c.body = resolve_vars(body->expr, index_of, out.diagnostics);
    c.member_set = body->member_set;
    if (std::holds_alternative<LabelSet>(c.member_set)) {
      if (c.body->op != ExprOp::Var) {
        err("NonCategoricalLabelSet",
            "constraint '" + c.name + "': label membership needs a single variable on the left",
            pending.where.line, pending.where.col);
      } else if (c.body->index >= 0) {
        c.member_var = c.body->index;
        if (inst.variables[static_cast<std::size_t>(c.member_var)].kind !=
            VarKind::Categorical) {
          err("NonCategoricalLabelSet",
              "constraint '" + c.name + "': variable '" + c.body->name +
                  "' is not categorical",
              pending.where.line, pending.where.col);
        }
      }
    }
  }

  // Derive each simulation's documented exit-code table from its errcode
  // bindings (first declaration wins; duplicates are reported by validate).
  for (const auto& c : inst.constraints) {
    if (!c.sim || c.sim->source != SimSource::ErrorFlag) continue;
    for (auto& spec : inst.simulations)
      if (spec.id == c.sim->sim) spec.error_codes.emplace(c.sim->error_code, c.name);
  }

  for (auto& d : validate(inst)) out.diagnostics.push_back(std::move(d));

  (void)structural_failure;
  out.instance = std::move(inst);
  return out;
}

inline ProblemParse parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ProblemParse out;
    out.diagnostics.push_back(
        {Severity::Error, "FileNotFound", "cannot open '" + path + "'", 0, 0});
    return out;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

}  // namespace qrak
