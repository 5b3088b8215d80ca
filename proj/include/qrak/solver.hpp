#pragma once

// Coordinate direct search driven by the constraint classification. Candidates
// step one coordinate at a time away from the incumbent frame; every declared
// constraint is handled by the treatment its class calls for:
//
//   - unrelaxable or hidden violations discard the point (extreme barrier),
//   - relaxable quantifiable violations fold into the aggregate h and compete
//     through a progressive barrier with a shrinking ceiling h_max,
//   - relaxable nonquantifiable violations count against the point in
//     tie-breaks,
//   - a one-variable affine a priori constraint can instead clamp candidates
//     onto its bound before anything is evaluated (projection).
//
// The search is fully deterministic: poll order, tie-breaks, and the history
// log are reproducible bit for bit across runs with the same options.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrak/evaluator.hpp"
#include "qrak/expr.hpp"
#include "qrak/format.hpp"
#include "qrak/harness.hpp"
#include "qrak/problem.hpp"

namespace qrak {

// ---------------------------------------------------------------------------
// Per-constraint treatments.
// ---------------------------------------------------------------------------

enum class Treatment {
  ExtremeBarrier,      // any violation discards the point (f = +inf)
  ProgressiveBarrier,  // violations fold into h; infeasible incumbents allowed
  Projection,          // candidates are clamped onto the bound before evaluation
  PenaltyCount,        // violations count against the point in tie-breaks
  StageAPriori,        // checked algebraically before simulations, folded into h
};

inline const char* treatment_name(Treatment t) {
  switch (t) {
    case Treatment::ExtremeBarrier: return "extreme-barrier";
    case Treatment::ProgressiveBarrier: return "progressive-barrier";
    case Treatment::Projection: return "projection";
    case Treatment::PenaltyCount: return "penalty-count";
    case Treatment::StageAPriori: return "stage-apriori";
  }
  return "?";
}

/// A one-variable affine a priori constraint reduced to an interval on that
/// variable, so candidates can be clamped instead of rejected.
struct DerivedBound {
  int var = -1;
  double lo = -kInf;
  double hi = kInf;
  std::size_t constraint_index = 0;  // owning constraint (policy row)
};

/// Recognizes `a*x + b <= 0`, `= 0`, or `in [lo, hi]` as a bound on x.
/// Finite numeric sets, label sets, multi-variable and nonlinear bodies are
/// not bounds.
inline std::optional<DerivedBound> bound_shape(const Constraint& c) {
  if (!c.a_priori() || !c.cls.quantifiable() || !c.body) return std::nullopt;
  auto lf = linear_form(*c.body);
  if (!lf) return std::nullopt;
  auto sv = lf->single_variable();
  if (!sv) return std::nullopt;
  const auto [var, a] = *sv;
  if (a == 0.0) return std::nullopt;
  const double b = lf->constant;

  DerivedBound out;
  out.var = var;
  switch (c.kind) {
    case ConstraintKind::Inequality:
      (a > 0.0 ? out.hi : out.lo) = -b / a;
      break;
    case ConstraintKind::Equality:
      out.lo = out.hi = -b / a;
      break;
    case ConstraintKind::SetMembership: {
      const auto* iv = std::get_if<Interval>(&c.member_set);
      if (!iv) return std::nullopt;
      double lo = (iv->lo - b) / a;
      double hi = (iv->hi - b) / a;
      if (a < 0.0) std::swap(lo, hi);
      out.lo = lo;
      out.hi = hi;
      break;
    }
  }
  return out;
}

/// An a priori quantifiable constraint with a linear body in two or more
/// variables. When its surface is active at a poll center, a coordinate
/// poll can wedge against it: every axis step either crosses the surface or
/// worsens the objective. Stepping along the surface's level set - the
/// direction the algebraic form hands us for free - keeps the constraint
/// satisfied while the objective can still improve.
struct TangentSource {
  std::vector<std::pair<int, double>> coef;  // (variable, weight)
  double constant = 0.0;
  double norm_sq = 0.0;
  double lo = 0.0, hi = 0.0;  // raw values at which the surface sits
};

/// Recognizes a multi-variable affine body as a tangent-poll source.
/// One-variable bodies are skipped: their tangent steps are coordinate
/// steps the regular poll already makes.
inline std::optional<TangentSource> tangent_shape(const Constraint& c) {
  if (!c.a_priori() || !c.cls.quantifiable() || !c.body) return std::nullopt;
  auto lf = linear_form(*c.body);
  if (!lf) return std::nullopt;
  TangentSource out;
  for (const auto& [var, w] : lf->coeffs)
    if (w != 0.0) out.coef.emplace_back(var, w);
  if (out.coef.size() < 2) return std::nullopt;
  out.constant = lf->constant;
  for (const auto& [var, w] : out.coef) out.norm_sq += w * w;
  switch (c.kind) {
    case ConstraintKind::Inequality:
    case ConstraintKind::Equality:
      break;  // surface at raw = 0
    case ConstraintKind::SetMembership: {
      const auto* iv = std::get_if<Interval>(&c.member_set);
      if (!iv) return std::nullopt;
      out.lo = iv->lo;
      out.hi = iv->hi;
      break;
    }
  }
  return out;
}

/// The treatment a constraint class calls for. Projection only applies to
/// bound-shaped a priori constraints, and only when enabled.
inline Treatment default_treatment(const Constraint& c, bool bound_shaped, bool use_projection) {
  if (c.cls.hidden()) return Treatment::ExtremeBarrier;
  if (c.cls.simulation_based()) {
    if (!c.cls.relaxable()) return Treatment::ExtremeBarrier;
    return c.cls.quantifiable() ? Treatment::ProgressiveBarrier : Treatment::PenaltyCount;
  }
  if (!c.cls.relaxable())
    return bound_shaped && use_projection ? Treatment::Projection : Treatment::ExtremeBarrier;
  if (!c.cls.quantifiable()) return Treatment::PenaltyCount;
  return bound_shaped && use_projection ? Treatment::Projection : Treatment::StageAPriori;
}

// ---------------------------------------------------------------------------
// Options, report, and status.
// ---------------------------------------------------------------------------

struct SolverOptions {
  Point x0;
  double delta0 = 1.0;
  double delta_min = 1e-9;
  std::uint64_t max_evaluations = 0;  // 0 = unlimited
  std::uint64_t max_simulations = 0;  // fresh executions; cache hits are free; 0 = unlimited
  std::uint32_t seed = 0;             // recorded in the report; the search is deterministic
  bool use_projection = true;
  bool restoration = false;  // coordinate recovery when the start is inadmissible
  EvalPolicy eval_policy;
};

enum class SolveStatus { SolvedAcceptable, ValidSolutionNotFound };

inline const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::SolvedAcceptable: return "solved-acceptable";
    case SolveStatus::ValidSolutionNotFound: return "no-valid-solution";
  }
  return "?";
}

/// Raised when the start point is inadmissible (hidden event, unrelaxable
/// violation, or infinite objective) and restoration is off or failed.
class InfeasibleStart : public std::runtime_error {
 public:
  explicit InfeasibleStart(const std::string& msg) : std::runtime_error(msg) {}
};

struct PolicyEntry {
  std::string constraint;
  std::string class_code;
  Treatment treatment = Treatment::ExtremeBarrier;
  std::uint64_t fired = 0;  // violations observed; for projection, clamps applied
};

struct HistoryRow {
  std::uint64_t ordinal = 0;  // 1-based submission order
  PointEvaluation pe;
  std::string incumbent;  // "", "feasible", or "infeasible": set where a point took over
};

struct SolveCounters {
  std::uint64_t iterations = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t rejected_apriori = 0;
  std::uint64_t sims_skipped = 0;
  std::uint64_t sim_requests = 0;
  std::uint64_t sim_cache_hits = 0;
  std::uint64_t sim_executions = 0;
};

struct SolveReport {
  std::string problem;
  SolveStatus status = SolveStatus::ValidSolutionNotFound;
  std::optional<PointEvaluation> solution;  // acceptable final answer, if any
  std::optional<PointEvaluation> best_feasible;
  std::optional<PointEvaluation> best_infeasible;
  std::vector<HistoryRow> history;
  std::vector<PolicyEntry> policy;  // declaration order, plus a hidden-event row
  SolveCounters counters;
  double delta0 = 1.0;
  double final_delta = 0.0;
  double h_max = kInf;
  std::uint32_t seed = 0;
  bool used_restoration = false;
};

/// How much the staged evaluation saved: points rejected a priori never
/// reached a simulation.
struct SimSavings {
  std::uint64_t points_evaluated = 0;
  std::uint64_t rejected_apriori = 0;
  std::uint64_t simulations_executed = 0;
};

inline SimSavings sim_savings(const SolveReport& rep) {
  return {rep.counters.evaluations, rep.counters.rejected_apriori, rep.counters.sim_executions};
}

// ---------------------------------------------------------------------------
// Polling.
// ---------------------------------------------------------------------------

/// One-coordinate moves around a frame center: +delta then -delta per real
/// variable, +/-max(1, round(delta)) for integers and binaries, and every
/// alternative label for categoricals. Variable-major order; the order is
/// part of the deterministic search.
inline std::vector<Point> poll_candidates(const std::vector<Variable>& vars, const Point& center,
                                          double delta) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < vars.size() && i < center.size(); ++i) {
    const Variable& v = vars[i];
    if (v.kind == VarKind::Categorical) {
      const long cur = std::lround(center[i]);
      for (std::size_t o = 0; o < v.categories.size(); ++o) {
        if (static_cast<long>(o) == cur) continue;
        Point p = center;
        p[i] = static_cast<double>(o);
        out.push_back(std::move(p));
      }
      continue;
    }
    const double step = v.integral() ? std::max(1.0, std::round(delta)) : delta;
    Point up = center;
    up[i] += step;
    out.push_back(std::move(up));
    Point dn = center;
    dn[i] -= step;
    out.push_back(std::move(dn));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Progressive-barrier incumbent state.
// ---------------------------------------------------------------------------

namespace detail {

inline bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool pb_feasible_order(const PointEvaluation& a, const PointEvaluation& b) {
  if (a.f != b.f) return a.f < b.f;
  return lex_less(a.x, b.x);
}

inline bool pb_infeasible_order(const PointEvaluation& a, const PointEvaluation& b) {
  if (a.h != b.h) return a.h < b.h;
  if (a.f != b.f) return a.f < b.f;
  if (a.n_viol_nonquant != b.n_viol_nonquant) return a.n_viol_nonquant < b.n_viol_nonquant;
  return lex_less(a.x, b.x);
}

inline bool pb_dominates(const PointEvaluation& a, const PointEvaluation& b) {
  return a.f <= b.f && a.h <= b.h && (a.f < b.f || a.h < b.h);
}

}  // namespace detail

struct BarrierState {
  std::optional<PointEvaluation> feasible;
  std::optional<PointEvaluation> infeasible;
  double h_max = kInf;  // ceiling on the violation an infeasible incumbent may carry
};

struct BarrierUpdate {
  bool improved = false;
  const PointEvaluation* became_feasible = nullptr;    // batch entry that took over
  const PointEvaluation* became_infeasible = nullptr;  // batch entry that took over
};

/// Folds one batch of evaluations into the incumbent pair. The feasible
/// incumbent advances on strict objective decrease. The infeasible incumbent
/// must keep 0 < h <= h_max, undercut the feasible objective, and dominate
/// its predecessor in (f, h). The ceiling then tightens to the largest h
/// observed below it, driving the infeasible frontier toward feasibility.
inline BarrierUpdate barrier_update(BarrierState& st,
                                    const std::vector<const PointEvaluation*>& batch) {
  BarrierUpdate upd;
  const double ceiling = st.h_max;

  const PointEvaluation* best_f = nullptr;
  for (const auto* pe : batch) {
    if (!pe->feasible() || !std::isfinite(pe->f)) continue;
    if (!best_f || detail::pb_feasible_order(*pe, *best_f)) best_f = pe;
  }
  if (best_f && (!st.feasible || best_f->f < st.feasible->f)) {
    st.feasible = *best_f;
    upd.became_feasible = best_f;
    upd.improved = true;
  }

  // An infeasible incumbent is only worth polling while its objective
  // undercuts the feasible one.
  if (st.feasible && st.infeasible && st.infeasible->f >= st.feasible->f) st.infeasible.reset();

  const double f_cap = st.feasible ? st.feasible->f : kInf;
  const PointEvaluation* best_i = nullptr;
  for (const auto* pe : batch) {
    if (pe->feasible() || !std::isfinite(pe->f)) continue;
    if (!(pe->h > 0.0) || pe->h > ceiling || !(pe->f < f_cap)) continue;
    if (st.infeasible && !detail::pb_dominates(*pe, *st.infeasible)) continue;
    if (!best_i || detail::pb_infeasible_order(*pe, *best_i)) best_i = pe;
  }
  if (best_i) {
    st.infeasible = *best_i;
    upd.became_infeasible = best_i;
    upd.improved = true;
  }

  double tightened = 0.0;
  for (const auto* pe : batch)
    if (pe->h > 0.0 && pe->h < ceiling) tightened = std::max(tightened, pe->h);
  if (st.infeasible && st.infeasible->h > 0.0 && st.infeasible->h <= ceiling)
    tightened = std::max(tightened, st.infeasible->h);
  if (tightened > 0.0) st.h_max = tightened;

  return upd;
}

// ---------------------------------------------------------------------------
// Solver.
// ---------------------------------------------------------------------------

inline std::string format_point(const Point& x) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ", ";
    out += format_double(x[i]);
  }
  out += ")";
  return out;
}

// Successful iterations double the frame, capped at delta0 * 2^20 so a run
// that strays (an unbounded descent, say) stays on a representable mesh.
inline constexpr double kDeltaGrowthCap = 1048576.0;

class Solver {
 public:
  Solver(const ProblemInstance& inst, SimRunner& runner, SolverOptions opts)
      : inst_(inst), eval_(inst, runner, opts.eval_policy), opts_(std::move(opts)) {
    if (opts_.x0.size() != inst_.dimension())
      throw std::invalid_argument("start point has " + std::to_string(opts_.x0.size()) +
                                  " coordinates; the problem has " +
                                  std::to_string(inst_.dimension()));
    for (double v : opts_.x0)
      if (!std::isfinite(v)) throw std::invalid_argument("start point must be finite");
    if (!(opts_.delta0 > 0.0) || !(opts_.delta_min > 0.0))
      throw std::invalid_argument("frame sizes must be positive");

    box_lo_.reserve(inst_.variables.size());
    box_hi_.reserve(inst_.variables.size());
    for (const auto& v : inst_.variables) {
      double lo = v.effective_lower(), hi = v.effective_upper();
      if (v.integral()) {
        lo = std::ceil(lo);
        hi = std::floor(hi);
      }
      box_lo_.push_back(lo);
      box_hi_.push_back(hi);
    }

    for (std::size_t i = 0; i < inst_.constraints.size(); ++i) {
      const Constraint& c = inst_.constraints[i];
      auto db = bound_shape(c);
      const Treatment t = default_treatment(c, db.has_value(), opts_.use_projection);
      if (t == Treatment::Projection) {
        db->constraint_index = i;
        derived_.push_back(*db);
      }
      if (auto ts = tangent_shape(c)) tangents_.push_back(std::move(*ts));
      policy_index_[c.name] = i;
      policy_.push_back({c.name, c.cls.code(), t, 0});
    }
    // Undeclared (hidden) events are attributed to a synthetic trailing row.
    policy_.push_back({"(hidden)", "NUSH", Treatment::ExtremeBarrier, 0});

    sims_start_ = runner.counters();
  }

  /// Runs the search to completion. Single-use: the report and internal
  /// counters cover exactly one run.
  SolveReport solve() {
    SolveReport rep;
    rep.problem = inst_.name;
    rep.delta0 = opts_.delta0;
    rep.seed = opts_.seed;

    BarrierState st;
    std::optional<PointEvaluation> anchor;

    Point start = opts_.x0;
    project(start, true);
    seen_.insert(start);
    std::size_t seed_idx = submit(rep, start);

    if (!admissible(rep.history[seed_idx].pe)) {
      if (!opts_.restoration) throw InfeasibleStart(describe_start(rep.history[seed_idx].pe));
      rep.used_restoration = true;
      seed_idx = restore(rep, seed_idx);
    }

    {
      const PointEvaluation& pe0 = rep.history[seed_idx].pe;
      std::vector<const PointEvaluation*> seed{&pe0};
      BarrierUpdate u = barrier_update(st, seed);
      if (u.became_feasible) rep.history[seed_idx].incumbent = "feasible";
      if (u.became_infeasible) rep.history[seed_idx].incumbent = "infeasible";
      if (!st.feasible && !st.infeasible) anchor = pe0;
    }

    const double delta_cap = opts_.delta0 * kDeltaGrowthCap;
    double delta = opts_.delta0;

    while (delta >= opts_.delta_min && budget_left()) {
      ++rep.counters.iterations;

      std::vector<Point> centers;
      if (st.feasible) centers.push_back(st.feasible->x);
      if (st.infeasible) centers.push_back(st.infeasible->x);
      if (centers.empty() && anchor) centers.push_back(anchor->x);
      if (centers.empty()) break;

      std::vector<std::size_t> idxs;
      bool out_of_budget = false;
      for (const auto& c : centers) {
        if (out_of_budget) break;
        std::vector<Point> cands = poll_candidates(inst_.variables, c, delta);
        add_tangent_candidates(c, delta, cands);
        for (Point& cand : cands) {
          if (!budget_left()) {
            out_of_budget = true;
            break;
          }
          project(cand, true);
          if (!seen_.insert(cand).second) continue;
          idxs.push_back(submit(rep, cand));
        }
      }
      if (idxs.empty()) {
        delta *= 0.5;
        continue;
      }

      std::vector<const PointEvaluation*> batch;
      batch.reserve(idxs.size());
      for (auto i : idxs) batch.push_back(&rep.history[i].pe);

      BarrierUpdate u = barrier_update(st, batch);
      for (std::size_t k = 0; k < batch.size(); ++k) {
        if (batch[k] == u.became_feasible) rep.history[idxs[k]].incumbent = "feasible";
        if (batch[k] == u.became_infeasible) rep.history[idxs[k]].incumbent = "infeasible";
      }

      bool improved = u.improved;
      if (st.feasible || st.infeasible) {
        anchor.reset();
      } else if (anchor) {
        // No incumbent yet: chase fewer nonquantifiable violations instead.
        const PointEvaluation* best = nullptr;
        for (const auto* pe : batch) {
          if (!std::isfinite(pe->f) || pe->h > 0.0) continue;
          if (!best || penalty_order(*pe, *best)) best = pe;
        }
        if (best && penalty_strictly_better(*best, *anchor)) {
          anchor = *best;
          improved = true;
        }
      }

      delta = improved ? std::min(delta * 2.0, delta_cap) : delta * 0.5;
    }

    rep.final_delta = delta;
    rep.h_max = st.h_max;
    rep.best_feasible = st.feasible;
    rep.best_infeasible = st.infeasible;
    if (st.feasible && is_acceptable_solution(*st.feasible, inst_)) {
      rep.status = SolveStatus::SolvedAcceptable;
      rep.solution = st.feasible;
    } else if (st.infeasible && is_acceptable_solution(*st.infeasible, inst_)) {
      rep.status = SolveStatus::SolvedAcceptable;
      rep.solution = st.infeasible;
    } else {
      rep.status = SolveStatus::ValidSolutionNotFound;
    }

    rep.policy = policy_;
    rep.counters.evaluations = eval_.counters().points_evaluated;
    rep.counters.rejected_apriori = eval_.counters().rejected_apriori;
    rep.counters.sims_skipped = eval_.counters().sims_skipped;
    const RunnerCounters rc = eval_.runner().counters();
    rep.counters.sim_requests = rc.requests - sims_start_.requests;
    rep.counters.sim_cache_hits = rc.cache_hits - sims_start_.cache_hits;
    rep.counters.sim_executions = rc.executions - sims_start_.executions;
    return rep;
  }

 private:
  /// Clamps a candidate into the variable boxes (always) and onto derived
  /// projection bounds (when enabled), snapping integral coordinates.
  /// Appends tangent-poll candidates for every linear surface active at the
  /// center: unit-length projections of the coordinate directions onto the
  /// surface's level set, stepped by delta both ways. A surface is active
  /// when one poll step can reach it.
  void add_tangent_candidates(const Point& center, double delta,
                              std::vector<Point>& out) const {
    for (const auto& t : tangents_) {
      double raw = t.constant;
      for (const auto& [var, w] : t.coef) raw += w * center[static_cast<std::size_t>(var)];
      const double reach = delta * std::sqrt(t.norm_sq);
      if (std::min(std::fabs(raw - t.lo), std::fabs(raw - t.hi)) > reach) continue;

      for (const auto& [var, w] : t.coef) {
        const double scale = w / t.norm_sq;
        double len_sq = 0.0;
        for (const auto& [v2, w2] : t.coef) {
          const double comp = (v2 == var ? 1.0 : 0.0) - scale * w2;
          len_sq += comp * comp;
        }
        if (len_sq <= 1e-24) continue;
        const double step = delta / std::sqrt(len_sq);
        Point up = center, down = center;
        for (const auto& [v2, w2] : t.coef) {
          const double comp = (v2 == var ? 1.0 : 0.0) - scale * w2;
          up[static_cast<std::size_t>(v2)] += step * comp;
          down[static_cast<std::size_t>(v2)] -= step * comp;
        }
        out.push_back(std::move(up));
        out.push_back(std::move(down));
      }
    }
  }

  void project(Point& p, bool count) {
    for (std::size_t i = 0; i < p.size() && i < inst_.variables.size(); ++i) {
      if (inst_.variables[i].integral()) p[i] = static_cast<double>(std::llround(p[i]));
      if (p[i] < box_lo_[i]) p[i] = box_lo_[i];
      if (p[i] > box_hi_[i]) p[i] = box_hi_[i];
    }
    if (opts_.use_projection) {
      for (const auto& db : derived_) {
        double& v = p[static_cast<std::size_t>(db.var)];
        double lo = db.lo, hi = db.hi;
        if (inst_.variables[static_cast<std::size_t>(db.var)].integral()) {
          lo = std::ceil(lo);
          hi = std::floor(hi);
        }
        if (v < lo) {
          v = lo;
          if (count) ++policy_[db.constraint_index].fired;
        } else if (v > hi) {
          v = hi;
          if (count) ++policy_[db.constraint_index].fired;
        }
      }
    }
    for (auto& v : p)
      if (v == 0.0) v = 0.0;  // never let a snap or clamp introduce -0
  }

  std::size_t submit(SolveReport& rep, const Point& x) {
    PointEvaluation pe = eval_.evaluate(x);
    record_fires(pe);
    HistoryRow row;
    row.ordinal = static_cast<std::uint64_t>(rep.history.size()) + 1;
    row.pe = std::move(pe);
    rep.history.push_back(std::move(row));
    return rep.history.size() - 1;
  }

  void record_fires(const PointEvaluation& pe) {
    for (const auto& r : pe.results) {
      if (r.kind == EvalResult::Kind::Hidden) {
        ++policy_.back().fired;
        continue;
      }
      if (r.satisfied) continue;
      auto it = policy_index_.find(r.constraint);
      if (it != policy_index_.end()) ++policy_[it->second].fired;
    }
  }

  bool budget_left() {
    if (opts_.max_evaluations &&
        eval_.counters().points_evaluated >= opts_.max_evaluations)
      return false;
    if (opts_.max_simulations &&
        eval_.runner().counters().executions - sims_start_.executions >= opts_.max_simulations)
      return false;
    return true;
  }

  bool admissible(const PointEvaluation& pe) const {
    return pe.unrelaxable_ok && !pe.hidden_event && std::isfinite(pe.f);
  }

  // Restoration chases admissibility lexicographically: first the number of
  // violated (or undecided, or hidden) unrelaxable constraints, then the sum
  // of their squared known violations, then a finite objective. Rejected
  // points carry their first-stage measures, so no simulations are spent on
  // hopeless candidates.
  struct RestoreScore {
    int bad = 0;
    double sq = 0.0;
    bool f_infinite = true;
  };

  RestoreScore restore_score(const PointEvaluation& pe) const {
    RestoreScore s;
    s.f_infinite = !std::isfinite(pe.f);
    for (const auto& r : pe.results) {
      if (r.kind == EvalResult::Kind::Hidden || r.kind == EvalResult::Kind::Unknown) {
        ++s.bad;
        continue;
      }
      if (r.satisfied) continue;
      const Constraint* c = inst_.find_constraint(r.constraint);
      if (!c || c->cls.relaxable()) continue;
      ++s.bad;
      if (r.kind == EvalResult::Kind::Quantified && r.info.violation)
        s.sq += *r.info.violation * *r.info.violation;
    }
    return s;
  }

  static bool restore_before(const RestoreScore& a, const RestoreScore& b) {
    if (a.bad != b.bad) return a.bad < b.bad;
    if (a.sq != b.sq) return a.sq < b.sq;
    return a.f_infinite < b.f_infinite;
  }

  std::size_t restore(SolveReport& rep, std::size_t start_idx) {
    const double cap = opts_.delta0 * kDeltaGrowthCap;
    double delta = opts_.delta0;
    std::size_t center = start_idx;
    RestoreScore cs = restore_score(rep.history[center].pe);

    while (delta >= opts_.delta_min && budget_left()) {
      if (admissible(rep.history[center].pe)) return center;
      ++rep.counters.iterations;
      bool improved = false;
      const Point cx = rep.history[center].pe.x;  // history may reallocate below
      for (Point cand : poll_candidates(inst_.variables, cx, delta)) {
        if (!budget_left()) break;
        project(cand, true);
        if (!seen_.insert(cand).second) continue;
        const std::size_t idx = submit(rep, cand);
        RestoreScore s = restore_score(rep.history[idx].pe);
        if (restore_before(s, cs)) {
          center = idx;
          cs = s;
          improved = true;
        }
      }
      if (admissible(rep.history[center].pe)) return center;
      delta = improved ? std::min(delta * 2.0, cap) : delta * 0.5;
    }
    if (admissible(rep.history[center].pe)) return center;
    throw InfeasibleStart(describe_start(rep.history[center].pe));
  }

  static bool penalty_order(const PointEvaluation& a, const PointEvaluation& b) {
    if (a.n_viol_nonquant != b.n_viol_nonquant) return a.n_viol_nonquant < b.n_viol_nonquant;
    if (a.f != b.f) return a.f < b.f;
    return detail::lex_less(a.x, b.x);
  }

  static bool penalty_strictly_better(const PointEvaluation& a, const PointEvaluation& b) {
    if (a.n_viol_nonquant != b.n_viol_nonquant) return a.n_viol_nonquant < b.n_viol_nonquant;
    return a.f < b.f;
  }

  std::string describe_start(const PointEvaluation& pe) const {
    std::string msg = "no admissible start point: ";
    if (pe.hidden_event) {
      msg += "a hidden constraint fired at " + format_point(pe.x);
    } else if (!pe.unrelaxable_ok) {
      msg += "unrelaxable violation(s) at " + format_point(pe.x) + ":";
      for (const auto& r : pe.results) {
        if (r.satisfied) continue;
        const Constraint* c = inst_.find_constraint(r.constraint);
        if (c && c->cls.relaxable() && r.kind != EvalResult::Kind::Unknown) continue;
        msg += ' ';
        msg += r.constraint.empty() ? "(hidden)" : r.constraint;
      }
    } else {
      msg += "the objective is not finite at " + format_point(pe.x);
    }
    if (!opts_.restoration) msg += " (restoration is disabled)";
    return msg;
  }

  const ProblemInstance& inst_;
  Evaluator eval_;
  SolverOptions opts_;
  std::vector<double> box_lo_, box_hi_;
  std::vector<DerivedBound> derived_;
  std::vector<TangentSource> tangents_;
  std::vector<PolicyEntry> policy_;
  std::map<std::string, std::size_t> policy_index_;
  std::set<Point> seen_;
  RunnerCounters sims_start_;
};

// ---------------------------------------------------------------------------
// Report rendering.
// ---------------------------------------------------------------------------

/// Evaluation log plus an incumbent-marker column; bytes are reproducible
/// across runs with identical options.
inline std::string history_csv(const SolveReport& rep) {
  std::string out = eval_csv_header();
  out += ",incumbent\n";
  for (const auto& row : rep.history) {
    out += eval_csv_row(row.ordinal, row.pe);
    out += ',';
    out += row.incumbent;
    out += '\n';
  }
  return out;
}

/// One row per declared constraint (declaration order) plus the synthetic
/// hidden-event row: name, class, treatment, and how often it fired.
inline std::string policy_trace_text(const SolveReport& rep) {
  std::size_t w_name = 10, w_class = 5, w_treat = 9;  // header widths
  for (const auto& p : rep.policy) {
    w_name = std::max(w_name, p.constraint.size());
    w_class = std::max(w_class, p.class_code.size());
    w_treat = std::max(w_treat, std::string(treatment_name(p.treatment)).size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string out = pad("constraint", w_name) + "  " + pad("class", w_class) + "  " +
                    pad("treatment", w_treat) + "  fired\n";
  for (const auto& p : rep.policy) {
    out += pad(p.constraint, w_name) + "  " + pad(p.class_code, w_class) + "  " +
           pad(treatment_name(p.treatment), w_treat) + "  " + std::to_string(p.fired) + "\n";
  }
  return out;
}

inline std::string report_text(const SolveReport& rep) {
  std::string out;
  auto line = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  auto describe = [](const PointEvaluation& pe) {
    return "x = " + format_point(pe.x) + "  f = " + format_double(pe.f) +
           "  h = " + format_double(pe.h) + "  stage = " + stage_name(pe.stage);
  };
  line("problem: " + rep.problem);
  line("status: " + std::string(solve_status_name(rep.status)));
  line(rep.solution ? "solution: " + describe(*rep.solution) : std::string("solution: none"));
  line(rep.best_feasible ? "best feasible: " + describe(*rep.best_feasible)
                         : std::string("best feasible: none"));
  line(rep.best_infeasible ? "best infeasible: " + describe(*rep.best_infeasible)
                           : std::string("best infeasible: none"));
  line("iterations: " + std::to_string(rep.counters.iterations));
  line("evaluations: " + std::to_string(rep.counters.evaluations) +
       " (rejected a priori: " + std::to_string(rep.counters.rejected_apriori) +
       ", simulations skipped: " + std::to_string(rep.counters.sims_skipped) + ")");
  line("simulations: " + std::to_string(rep.counters.sim_executions) + " executed, " +
       std::to_string(rep.counters.sim_cache_hits) + " cache hits, " +
       std::to_string(rep.counters.sim_requests) + " requests");
  line("frame size: start " + format_double(rep.delta0) + ", final " +
       format_double(rep.final_delta));
  line("violation ceiling: " + format_double(rep.h_max));
  line("restoration used: " + std::string(rep.used_restoration ? "yes" : "no"));
  line("seed: " + std::to_string(rep.seed));
  return out;
}

}  // namespace qrak
