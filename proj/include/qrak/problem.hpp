#pragma once

// Problem model: variables, classified constraints, simulation declarations,
// violation measures with quantifiable-detail masking, instance validation,
// and reformulation hints.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qrak/diagnostics.hpp"
#include "qrak/expr.hpp"
#include "qrak/format.hpp"
#include "qrak/taxonomy.hpp"

namespace qrak {

using Point = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Residuals within this tolerance of an exact target count as on-target:
/// equality and finite-set constraints snap to violation zero below it.
inline constexpr double kEqualityDecisionTol = 1e-9;

// ---------------------------------------------------------------------------
// Variables.
// ---------------------------------------------------------------------------

enum class VarKind { Real, Integer, Binary, Categorical };

inline const char* var_kind_name(VarKind k) {
  switch (k) {
    case VarKind::Real: return "real";
    case VarKind::Integer: return "int";
    case VarKind::Binary: return "bin";
    case VarKind::Categorical: return "cat";
  }
  return "?";
}

struct Variable {
  std::string name;
  VarKind kind = VarKind::Real;
  double lower = -kInf;
  double upper = kInf;
  std::vector<std::string> categories;  // Categorical only; coordinate = ordinal

  bool integral() const { return kind != VarKind::Real; }

  double effective_lower() const {
    if (kind == VarKind::Binary || kind == VarKind::Categorical) return 0.0;
    return lower;
  }
  double effective_upper() const {
    if (kind == VarKind::Binary) return 1.0;
    if (kind == VarKind::Categorical)
      return categories.empty() ? 0.0 : static_cast<double>(categories.size()) - 1.0;
    return upper;
  }
};

// ---------------------------------------------------------------------------
// Constraint bodies.
// ---------------------------------------------------------------------------

enum class ConstraintKind { Inequality, Equality, SetMembership };

inline const char* constraint_kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::Inequality: return "inequality";
    case ConstraintKind::Equality: return "equality";
    case ConstraintKind::SetMembership: return "membership";
  }
  return "?";
}

struct NumericSet {
  std::vector<double> values;
};
struct LabelSet {
  std::vector<std::string> labels;
};
struct Interval {
  double lo = -kInf;
  double hi = kInf;
};
using MemberSet = std::variant<std::monostate, NumericSet, LabelSet, Interval>;

/// How a simulation-based constraint (or objective) reads its value from a
/// simulation run.
enum class SimSource {
  Output,     // compare output #output_index against rhs
  Elapsed,    // elapsed wall-clock time against the declared timeout
  ErrorFlag,  // violated exactly when the run exits with error_code
};

struct SimBinding {
  std::string sim;             // simulation id
  SimSource source = SimSource::Output;
  int output_index = 0;        // 0-based output slot (Output)
  double rhs = 0.0;            // comparison constant (Output)
  bool flipped = false;        // body was written as ">=": raw = rhs - out
  int error_code = 0;          // ErrorFlag

  double raw_from_output(double v) const { return flipped ? rhs - v : v - rhs; }
};

struct SimulationSpec {
  std::string id;
  std::vector<std::string> argv;   // argv[0] may be "inproc:<name>"
  int output_arity = 0;
  double timeout_seconds = 0.0;    // 0 disables the watchdog
  std::map<int, std::string> error_codes;  // documented exit code -> constraint name

  bool has_timeout() const { return timeout_seconds > 0.0; }
  bool in_process() const {
    return !argv.empty() && argv.front().rfind("inproc:", 0) == 0;
  }
};

struct Constraint {
  std::string name;
  ConstraintClass cls = class_from_code("QRAK");
  ConstraintKind kind = ConstraintKind::Inequality;

  // A priori bodies, normalized so raw = c(x) with feasibility raw <= 0
  // (inequality), raw = 0 (equality), or raw in member_set.
  ExprPtr body;
  MemberSet member_set;
  int member_var = -1;  // resolved variable index for label-set membership

  // Simulation-based bodies.
  std::optional<SimBinding> sim;

  // Widens acceptance (not the violation measure) for relaxable quantifiable
  // constraints: a final answer may violate by at most this much.
  double solution_tolerance = 0.0;

  bool a_priori() const { return cls.a_priori(); }
  bool has_expr_body() const { return body != nullptr || member_var >= 0; }
};

struct ProblemInstance {
  std::string name;
  std::vector<Variable> variables;
  ExprPtr objective;                       // algebraic objective ...
  std::optional<SimBinding> objective_sim; // ... or a simulation output
  std::vector<Constraint> constraints;
  std::vector<SimulationSpec> simulations;

  int dimension() const { return static_cast<int>(variables.size()); }

  int variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i].name == name) return static_cast<int>(i);
    return -1;
  }
  const SimulationSpec* find_simulation(std::string_view id) const {
    for (const auto& s : simulations)
      if (s.id == id) return &s;
    return nullptr;
  }
  const Constraint* find_constraint(std::string_view name) const {
    for (const auto& c : constraints)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Violation measure.
// ---------------------------------------------------------------------------

/// Requesting a numeric violation or margin from a nonquantifiable
/// constraint (or a label-set membership) is a caller bug, not a data state.
class NotQuantifiable : public std::logic_error {
 public:
  explicit NotQuantifiable(const std::string& what) : std::logic_error(what) {}
};

/// Feasibility plus the two optional measures. `violation` and `margin` are
/// disengaged when the constraint's detail level (or the run outcome) leaves
/// them unquantified; when engaged, feasible <=> violation == 0.
struct ViolationInfo {
  bool feasible = false;
  std::optional<double> violation;
  std::optional<double> margin;
};

namespace detail {

inline double set_distance(const NumericSet& s, double raw) {
  double best = kInf;
  for (double a : s.values) best = std::min(best, std::fabs(raw - a));
  return best;
}

// Raw feasibility decision, before detail masking. Usable for any class.
inline bool raw_satisfied(const Constraint& c, double raw) {
  switch (c.kind) {
    case ConstraintKind::Inequality:
      return raw <= 0.0;
    case ConstraintKind::Equality:
      return std::fabs(raw) <= kEqualityDecisionTol;
    case ConstraintKind::SetMembership:
      if (const auto* s = std::get_if<NumericSet>(&c.member_set))
        return set_distance(*s, raw) <= kEqualityDecisionTol;
      if (const auto* iv = std::get_if<Interval>(&c.member_set))
        return raw >= iv->lo && raw <= iv->hi;
      throw NotQuantifiable("label-set membership has no numeric raw value");
  }
  return false;
}

}  // namespace detail

/// Boolean feasibility decision from a raw body value; valid for every class
/// with a numeric body (the only view the framework ever takes of
/// nonquantifiable constraints).
inline bool decide_satisfied(const Constraint& c, double raw) {
  return detail::raw_satisfied(c, raw);
}

/// The violation measure for a quantifiable constraint, computed from the
/// normalized raw body value and masked by the declared detail level.
///   inequality: violation = max(0, raw),  margin = max(0, -raw)
///   equality:   violation = |raw| (snapped to 0 within the decision tol)
///   finite set: violation = min distance to a member (snapped)
///   interval:   violation = distance outside, margin = distance to an edge
/// Throws NotQuantifiable for nonquantifiable classes and label sets.
inline ViolationInfo violation_measure(const Constraint& c, double raw) {
  if (!c.cls.quantifiable())
    throw NotQuantifiable("constraint '" + c.name + "' (" + c.cls.code() +
                          ") has no numeric violation measure");
  ViolationInfo out;
  double violation = 0.0;
  double margin = 0.0;
  switch (c.kind) {
    case ConstraintKind::Inequality:
      violation = std::max(0.0, raw);
      margin = std::max(0.0, -raw);
      break;
    case ConstraintKind::Equality: {
      double d = std::fabs(raw);
      if (d <= kEqualityDecisionTol) d = 0.0;
      violation = d;
      margin = 0.0;
      break;
    }
    case ConstraintKind::SetMembership: {
      if (const auto* s = std::get_if<NumericSet>(&c.member_set)) {
        double d = detail::set_distance(*s, raw);
        if (d <= kEqualityDecisionTol) d = 0.0;
        violation = d;
        margin = 0.0;
      } else if (const auto* iv = std::get_if<Interval>(&c.member_set)) {
        if (raw < iv->lo) violation = iv->lo - raw;
        else if (raw > iv->hi) violation = raw - iv->hi;
        else margin = std::min(raw - iv->lo, iv->hi - raw);
      } else {
        throw NotQuantifiable("label-set membership has no numeric violation measure");
      }
      break;
    }
  }
  out.feasible = violation == 0.0;
  out.violation = violation;
  out.margin = margin;

  switch (c.cls.detail().value_or(QuantifiableDetail::Fully)) {
    case QuantifiableDetail::Fully:
      break;
    case QuantifiableDetail::FeasibilityOnly:
      // The oracle only answers yes/no: a feasible point has violation 0 by
      // definition, an infeasible one has no usable magnitude.
      out.margin.reset();
      if (!out.feasible) out.violation.reset();
      break;
    case QuantifiableDetail::ViolationOnly:
      out.margin.reset();
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// A priori evaluation helpers.
// ---------------------------------------------------------------------------

/// Normalized body value of an a priori numeric constraint at x. Throws
/// DomainError when the expression faults, logic_error when the constraint
/// has no numeric a priori body.
inline double apriori_raw(const Constraint& c, std::span<const double> x) {
  if (!c.body) throw std::logic_error("constraint '" + c.name + "' has no algebraic body");
  return eval_expr(c.body, x);
}

/// Boolean a priori feasibility, covering label-set membership as well.
inline bool apriori_satisfied(const Constraint& c, const ProblemInstance& inst,
                              std::span<const double> x) {
  if (const auto* ls = std::get_if<LabelSet>(&c.member_set)) {
    if (c.member_var < 0 || static_cast<std::size_t>(c.member_var) >= x.size())
      throw std::logic_error("label membership has no resolved variable");
    const Variable& v = inst.variables[static_cast<std::size_t>(c.member_var)];
    const long ord = std::lround(x[static_cast<std::size_t>(c.member_var)]);
    if (ord < 0 || static_cast<std::size_t>(ord) >= v.categories.size()) return false;
    const std::string& label = v.categories[static_cast<std::size_t>(ord)];
    return std::find(ls->labels.begin(), ls->labels.end(), label) != ls->labels.end();
  }
  return decide_satisfied(c, apriori_raw(c, x));
}

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

inline std::vector<Diagnostic> validate(const ProblemInstance& inst) {
  std::vector<Diagnostic> ds;
  auto err = [&](std::string code, std::string msg) {
    ds.push_back({Severity::Error, std::move(code), std::move(msg), 0, 0});
  };
  auto warn = [&](std::string code, std::string msg) {
    ds.push_back({Severity::Warning, std::move(code), std::move(msg), 0, 0});
  };

  // Names must be unique within their kind, and simulation ids must not
  // shadow variables (constraint bodies reference both).
  {
    std::map<std::string, int> seen;
    for (const auto& v : inst.variables)
      if (++seen[v.name] == 2) err("DuplicateName", "duplicate variable '" + v.name + "'");
    std::map<std::string, int> cseen;
    for (const auto& c : inst.constraints)
      if (++cseen[c.name] == 2) err("DuplicateName", "duplicate constraint '" + c.name + "'");
    std::map<std::string, int> sseen;
    for (const auto& s : inst.simulations) {
      if (++sseen[s.id] == 2) err("DuplicateName", "duplicate simulation '" + s.id + "'");
      if (seen.count(s.id)) err("DuplicateName", "simulation '" + s.id + "' shadows a variable");
    }
  }

  for (const auto& v : inst.variables) {
    if (v.kind == VarKind::Categorical && v.categories.empty())
      err("EmptyDomain", "categorical variable '" + v.name + "' has no categories");
    if (v.effective_lower() > v.effective_upper())
      err("BadBounds", "variable '" + v.name + "' has lower bound above upper bound");
  }

  if (!inst.objective && !inst.objective_sim) err("NoObjective", "no minimize declaration");

  auto check_binding = [&](const SimBinding& b, const std::string& owner) {
    const SimulationSpec* spec = inst.find_simulation(b.sim);
    if (!spec) {
      err("UnknownSimulation", owner + " references undeclared simulation '" + b.sim + "'");
      return;
    }
    if (b.source == SimSource::Output &&
        (b.output_index < 0 || b.output_index >= spec->output_arity)) {
      err("BadOutputIndex", owner + " references output " + std::to_string(b.output_index + 1) +
                                " of '" + b.sim + "' (arity " +
                                std::to_string(spec->output_arity) + ")");
    }
    if (b.source == SimSource::Elapsed && !spec->has_timeout()) {
      err("TimeBindingWithoutTimeout",
          owner + " binds elapsed time but simulation '" + b.sim + "' declares no timeout");
    }
    if (b.source == SimSource::ErrorFlag && b.error_code == 0) {
      err("BadErrorCode", owner + " documents exit code 0, which signals success");
    }
  };

  if (inst.objective_sim) {
    check_binding(*inst.objective_sim, "objective");
    if (inst.objective_sim->source != SimSource::Output)
      err("BadObjectiveBinding", "objective must bind a simulation output");
  }

  std::map<std::string, std::map<int, std::string>> codes_per_sim;
  for (const auto& c : inst.constraints) {
    const std::string where = "constraint '" + c.name + "'";

    if (c.cls.hidden())
      err("DeclaredHidden",
          where + " declares class NUSH; a constraint you can declare is not hidden");

    const bool sim_bound = c.sim.has_value();
    if (sim_bound && c.cls.a_priori())
      err("AvailabilityMismatch",
          where + " has an a priori class (" + c.cls.code() + ") but a simulation body");
    if (!sim_bound && c.cls.simulation_based() && !c.cls.hidden())
      err("AvailabilityMismatch",
          where + " has a simulation class (" + c.cls.code() + ") but an algebraic body");

    if (sim_bound) {
      check_binding(*c.sim, where);
      if (c.sim->source == SimSource::ErrorFlag) {
        if (c.cls.quantifiable())
          err("QuantifiableFlagBinding",
              where + " binds an exit code, which is boolean; class must be nonquantifiable");
        auto& table = codes_per_sim[c.sim->sim];
        auto [it, fresh] = table.emplace(c.sim->error_code, c.name);
        if (!fresh)
          err("DuplicateErrorCode", where + " reuses exit code " +
                                        std::to_string(c.sim->error_code) +
                                        " already documented by '" + it->second + "'");
      }
    }

    if (std::holds_alternative<LabelSet>(c.member_set) && c.cls.quantifiable())
      err("QuantifiableLabelSet",
          where + " is label-set membership, which has no numeric measure; declare it N");

    if (c.solution_tolerance < 0.0)
      err("NegativeTolerance", where + " declares a negative tolerance");
    if (c.solution_tolerance > 0.0 && !c.cls.quantifiable())
      warn("NonquantifiableTolerance",
           where + " declares a tolerance, but a nonquantifiable violation cannot be "
                   "compared against one");
    if (c.solution_tolerance > 0.0 && c.cls.quantifiable() && !c.cls.relaxable())
      warn("UnrelaxableTolerance",
           where + " declares a tolerance on an unrelaxable constraint; it is ignored");

    if (c.kind == ConstraintKind::Equality && !c.cls.quantifiable() &&
        c.cls.simulation_based())
      warn("EqualityNonquantifiable",
           where + " is an equality with no violation measure from a simulation; "
                   "satisfying it exactly is practically impossible");
  }

  return ds;
}

// ---------------------------------------------------------------------------
// Reformulation hints.
// ---------------------------------------------------------------------------

struct ReformulationHint {
  std::string constraint;
  std::string from_code;
  std::string to_code;  // may be a wildcard display like "Q*AK"
  int from_leaf = 0;
  int to_leaf = 0;
  std::string reason;
};

/// Conservative relabeling suggestions. Only two moves are ever proposed —
/// N -> Q when a numeric form is visibly available, and S -> A when the body
/// is algebraic — because both only reveal information the declaration
/// already contains. Relaxability is never touched: whether violating a
/// constraint is survivable is a modeling fact, not a syntactic one.
inline std::vector<ReformulationHint> reformulation_hints(const ProblemInstance& inst) {
  std::vector<ReformulationHint> hints;
  for (const auto& c : inst.constraints) {
    if (c.cls.hidden()) continue;

    // Label membership is the only truly measure-free body; numeric sets and
    // intervals carry a distance, comparisons carry a residual.
    const bool numeric_body =
        !std::holds_alternative<LabelSet>(c.member_set) &&
        (c.body != nullptr || (c.sim && c.sim->source != SimSource::ErrorFlag));

    if (!c.cls.quantifiable() && numeric_body) {
      auto to = make_class(Quantifiability::Quantifiable, c.cls.relaxability(),
                           c.cls.availability(), Knowledge::Known);
      hints.push_back({c.name, c.cls.code(), to->code(), c.cls.leaf_index(), to->leaf_index(),
                       "the body is a numeric comparison, so a violation measure is available"});
    }

    if (c.cls.simulation_based() && c.body != nullptr) {
      bool bound_shaped = false;
      if (c.kind == ConstraintKind::Inequality) {
        if (auto lf = linear_form(*c.body)) bound_shaped = lf->single_variable().has_value();
      }
      if (bound_shaped && c.cls.quantifiable()) {
        hints.push_back({c.name, c.cls.code(), "Q*AK", c.cls.leaf_index(), 1,
                         "the body is a single-variable bound, checkable before any "
                         "simulation and enforceable by projection"});
      } else {
        auto to = make_class(c.cls.quantifiability(), c.cls.relaxability(),
                             Availability::APriori, Knowledge::Known);
        hints.push_back({c.name, c.cls.code(), to->code(), c.cls.leaf_index(),
                         to->leaf_index(),
                         "the body is an algebraic expression, evaluable without running "
                         "the simulation"});
      }
    }
  }
  return hints;
}

// ---------------------------------------------------------------------------
// Canonical rendering (the parser's normal form; reparsing is the identity).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string render_member_set(const MemberSet& set) {
  std::string out;
  if (const auto* s = std::get_if<NumericSet>(&set)) {
    out += "{";
    for (std::size_t i = 0; i < s->values.size(); ++i) {
      if (i) out += ", ";
      out += format_double(s->values[i]);
    }
    out += "}";
  } else if (const auto* ls = std::get_if<LabelSet>(&set)) {
    out += "{";
    for (std::size_t i = 0; i < ls->labels.size(); ++i) {
      if (i) out += ", ";
      out += ls->labels[i];
    }
    out += "}";
  } else if (const auto* iv = std::get_if<Interval>(&set)) {
    out += "[";
    out += format_double(iv->lo);
    out += ", ";
    out += format_double(iv->hi);
    out += "]";
  }
  return out;
}

inline std::string render_body(const Constraint& c) {
  if (c.sim) {
    std::string out = c.sim->sim;
    switch (c.sim->source) {
      case SimSource::Output:
        out += ":out " + std::to_string(c.sim->output_index + 1);
        out += c.sim->flipped ? " >= " : (c.kind == ConstraintKind::Equality ? " = " : " <= ");
        out += format_double(c.sim->rhs);
        break;
      case SimSource::Elapsed:
        out += ":time";
        break;
      case SimSource::ErrorFlag:
        out += ":errcode " + std::to_string(c.sim->error_code);
        break;
    }
    return out;
  }
  if (c.kind == ConstraintKind::SetMembership) {
    // Label membership keeps its variable as the body for rendering.
    std::string out = render_expression(c.body);
    out += " in ";
    out += render_member_set(c.member_set);
    return out;
  }
  std::string out = render_expression(c.body);
  out += c.kind == ConstraintKind::Equality ? " = 0" : " <= 0";
  return out;
}

}  // namespace detail

inline std::string render_problem(const ProblemInstance& inst) {
  std::string out;
  out += "problem " + inst.name + "\n";
  for (const auto& v : inst.variables) {
    out += "var " + v.name + " " + var_kind_name(v.kind);
    if (v.kind == VarKind::Real || v.kind == VarKind::Integer) {
      if (std::isfinite(v.lower) || std::isfinite(v.upper)) {
        out += " [" + format_double(v.lower) + ", " + format_double(v.upper) + "]";
      }
    } else if (v.kind == VarKind::Categorical) {
      out += " {";
      for (std::size_t i = 0; i < v.categories.size(); ++i) {
        if (i) out += ", ";
        out += v.categories[i];
      }
      out += "}";
    }
    out += "\n";
  }
  for (const auto& s : inst.simulations) {
    out += "simulation " + s.id + " cmd \"";
    for (std::size_t i = 0; i < s.argv.size(); ++i) {
      if (i) out += " ";
      out += s.argv[i];
    }
    out += "\" outputs " + std::to_string(s.output_arity);
    if (s.has_timeout()) out += " timeout " + format_double(s.timeout_seconds);
    out += "\n";
  }
  if (inst.objective_sim) {
    out += "minimize \"" + inst.objective_sim->sim + ":out " +
           std::to_string(inst.objective_sim->output_index + 1) + "\"\n";
  } else if (inst.objective) {
    out += "minimize \"" + render_expression(inst.objective) + "\"\n";
  }
  for (const auto& c : inst.constraints) {
    out += "constraint " + c.name + " " + c.cls.code() + " \"" + detail::render_body(c) + "\"";
    if (auto d = c.cls.detail(); d && *d != QuantifiableDetail::Fully) {
      out += d == QuantifiableDetail::FeasibilityOnly ? " detail feasibility"
                                                      : " detail violation";
    }
    if (c.solution_tolerance > 0.0) out += " tol " + format_double(c.solution_tolerance);
    out += "\n";
  }
  return out;
}

}  // namespace qrak
