#pragma once

// Staged point evaluation. A candidate runs through three stages —
// unrelaxable a priori constraints, relaxable a priori constraints, then
// simulations — and any unrelaxable a priori violation rejects the point
// before a single simulation is launched. The result aggregates feasibility
// into the extreme-barrier objective f, the squared-hinge violation h over
// quantifiable relaxable constraints, and a count of violated
// nonquantifiable relaxable constraints.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrak/format.hpp"
#include "qrak/harness.hpp"
#include "qrak/problem.hpp"

namespace qrak {

enum class EvalStage { RejectedAPriori, SimulationSkipped, Simulated };

inline const char* stage_name(EvalStage s) {
  switch (s) {
    case EvalStage::RejectedAPriori: return "rejected-apriori";
    case EvalStage::SimulationSkipped: return "simulation-skipped";
    case EvalStage::Simulated: return "simulated";
  }
  return "?";
}

struct EvalPolicy {
  // Whether a relaxable a priori violation also skips the simulations.
  // Off by default: such a point may still be a useful infeasible
  // intermediate, so whether to spend the simulation depends on the context.
  bool skip_sim_on_relaxable_apriori_violation = false;
};

struct PointEvaluation {
  Point x;
  EvalStage stage = EvalStage::RejectedAPriori;
  std::vector<EvalResult> results;  // constraint declaration order, evaluated ones only

  // Extreme-barrier objective: +inf exactly for hidden events, unrelaxable
  // violations (Unknown results count as violations), and non-completed
  // simulation runs. A simulation-bound objective whose run never happened
  // also reports +inf.
  double f = kInf;
  // Sum of squared violations over quantifiable relaxable constraints whose
  // magnitude is known (equalities contribute their squared residual).
  double h = 0.0;
  // Violated relaxable constraints with no usable magnitude: nonquantifiable
  // ones, plus feasibility-only oracles that answered "infeasible".
  int n_viol_nonquant = 0;
  bool hidden_event = false;
  int sim_calls_used = 0;
  bool unrelaxable_ok = true;

  /// Instance feasibility as far as this evaluation can tell. Skipped or
  /// rejected evaluations never report feasible: rejection clears
  /// unrelaxable_ok and the skip policy only fires on a relaxable violation.
  bool feasible() const {
    return h == 0.0 && n_viol_nonquant == 0 && unrelaxable_ok && !hidden_event;
  }
};

struct EvalCounters {
  std::uint64_t points_evaluated = 0;
  std::uint64_t rejected_apriori = 0;   // points stopped by stage one
  std::uint64_t sims_skipped = 0;       // points whose simulations the policy skipped
};

class Evaluator {
 public:
  Evaluator(const ProblemInstance& inst, SimRunner& runner, EvalPolicy policy = {})
      : inst_(inst), runner_(runner), policy_(policy) {}

  const ProblemInstance& instance() const { return inst_; }
  SimRunner& runner() { return runner_; }
  const EvalCounters& counters() const { return counters_; }
  const EvalPolicy& policy() const { return policy_; }

  PointEvaluation evaluate(const Point& x) {
    ++counters_.points_evaluated;

    PointEvaluation pe;
    pe.x = x;

    // Stage one: unrelaxable a priori constraints. All of them are checked
    // (not first-failure) so the results list is complete for diagnostics.
    bool rejected = false;
    for (const auto& c : inst_.constraints) {
      if (!c.a_priori() || c.cls.relaxable()) continue;
      apriori_result(c, x, pe);  // Unknown reports satisfied = false
      if (!pe.results.back().satisfied) rejected = true;
    }
    if (rejected) {
      ++counters_.rejected_apriori;
      pe.stage = EvalStage::RejectedAPriori;
      pe.unrelaxable_ok = false;
      pe.f = kInf;
      return pe;
    }

    // Stage two: relaxable a priori constraints, aggregated into h and the
    // nonquantifiable-violation count. An Unknown here (body outside its
    // domain) is conservatively an unrelaxable violation: reject.
    for (const auto& c : inst_.constraints) {
      if (!c.a_priori() || !c.cls.relaxable()) continue;
      apriori_result(c, x, pe);
      if (pe.results.back().kind == EvalResult::Kind::Unknown) rejected = true;
      else fold_relaxable(c, pe.results.back(), pe);
    }
    if (rejected) {
      ++counters_.rejected_apriori;
      pe.stage = EvalStage::RejectedAPriori;
      pe.unrelaxable_ok = false;
      pe.f = kInf;
      pe.h = 0.0;
      pe.n_viol_nonquant = 0;
      return pe;
    }

    if (policy_.skip_sim_on_relaxable_apriori_violation && (pe.h > 0.0 || pe.n_viol_nonquant > 0)) {
      ++counters_.sims_skipped;
      pe.stage = EvalStage::SimulationSkipped;
      pe.f = objective_apriori(x, pe);
      return pe;
    }

    // Stage three: every referenced simulation, in declaration order.
    pe.stage = EvalStage::Simulated;
    bool all_completed = true;
    std::optional<double> sim_objective;
    for (const auto& spec : inst_.simulations) {
      if (!references(spec)) continue;
      SimOutcome outcome = runner_.evaluate(spec, inst_.variables, x);
      ++pe.sim_calls_used;
      if (outcome.status != SimStatus::Completed) all_completed = false;

      for (auto& r : interpret_outcome(outcome, inst_)) {
        if (r.kind == EvalResult::Kind::Hidden) {
          pe.hidden_event = true;
          pe.results.push_back(std::move(r));
          continue;
        }
        const Constraint* c = inst_.find_constraint(r.constraint);
        if (r.kind == EvalResult::Kind::Unknown) {
          pe.unrelaxable_ok = false;  // conservative: unknown counts as violated
        } else if (c && c->cls.relaxable()) {
          fold_relaxable(*c, r, pe);
        } else if (!r.satisfied) {
          pe.unrelaxable_ok = false;
        }
        pe.results.push_back(std::move(r));
      }

      if (inst_.objective_sim && inst_.objective_sim->sim == spec.id)
        sim_objective = objective_from_outcome(outcome, *inst_.objective_sim);
    }

    if (pe.hidden_event || !pe.unrelaxable_ok || !all_completed) {
      pe.f = kInf;
    } else if (inst_.objective_sim) {
      pe.f = sim_objective && std::isfinite(*sim_objective) ? *sim_objective : kInf;
    } else {
      pe.f = objective_apriori(x, pe);
    }
    return pe;
  }

 private:
  bool references(const SimulationSpec& spec) const {
    if (inst_.objective_sim && inst_.objective_sim->sim == spec.id) return true;
    for (const auto& c : inst_.constraints)
      if (c.sim && c.sim->sim == spec.id) return true;
    return false;
  }

  /// Evaluates one a priori constraint at x into pe.results. An expression
  /// domain fault leaves the constraint Unknown (conservatively violated).
  void apriori_result(const Constraint& c, const Point& x, PointEvaluation& pe) const {
    EvalResult r;
    r.constraint = c.name;
    try {
      if (c.cls.quantifiable() && !std::holds_alternative<LabelSet>(c.member_set)) {
        r.kind = EvalResult::Kind::Quantified;
        r.info = violation_measure(c, apriori_raw(c, x));
        r.satisfied = r.info.feasible;
      } else {
        r.kind = EvalResult::Kind::Boolean;
        r.satisfied = apriori_satisfied(c, inst_, x);
      }
    } catch (const DomainError& e) {
      r.kind = EvalResult::Kind::Unknown;
      r.satisfied = false;
      r.note = e.what();
    }
    pe.results.push_back(std::move(r));
  }

  /// Folds one decided relaxable result into (h, n_viol_nonquant).
  static void fold_relaxable(const Constraint& c, const EvalResult& r, PointEvaluation& pe) {
    if (r.kind == EvalResult::Kind::Quantified) {
      if (r.info.feasible) return;
      if (r.info.violation) {
        pe.h += *r.info.violation * *r.info.violation;
      } else {
        ++pe.n_viol_nonquant;  // feasibility-only oracle: violated, magnitude unknown
      }
      return;
    }
    if (r.kind == EvalResult::Kind::Boolean && !r.satisfied) ++pe.n_viol_nonquant;
  }

  /// Algebraic objective value; +inf when absent or outside its domain.
  double objective_apriori(const Point& x, PointEvaluation&) const {
    if (!inst_.objective) return kInf;
    try {
      const double v = eval_expr(inst_.objective, x);
      return std::isfinite(v) ? v : kInf;
    } catch (const DomainError&) {
      return kInf;
    }
  }

  const ProblemInstance& inst_;
  SimRunner& runner_;
  EvalPolicy policy_;
  EvalCounters counters_;
};

/// Final-answer test: every constraint holds — relaxable quantifiable ones
/// within their declared solution tolerance — and nothing hidden fired.
inline bool is_acceptable_solution(const PointEvaluation& pe, const ProblemInstance& inst) {
  if (pe.hidden_event || pe.stage != EvalStage::Simulated) return false;
  if (!std::isfinite(pe.f)) return false;
  if (!pe.unrelaxable_ok) return false;

  std::map<std::string, const EvalResult*> by_name;
  for (const auto& r : pe.results)
    if (!r.constraint.empty()) by_name[r.constraint] = &r;

  for (const auto& c : inst.constraints) {
    auto it = by_name.find(c.name);
    if (it == by_name.end()) return false;  // never decided
    const EvalResult& r = *it->second;
    switch (r.kind) {
      case EvalResult::Kind::Unknown:
      case EvalResult::Kind::Hidden:
        return false;
      case EvalResult::Kind::Boolean:
        if (!r.satisfied) return false;
        break;
      case EvalResult::Kind::Quantified:
        if (r.info.feasible) break;
        // The tolerance only widens relaxable constraints, and only when the
        // violation magnitude is actually known.
        if (!c.cls.relaxable()) return false;
        if (!r.info.violation || *r.info.violation > c.solution_tolerance) return false;
        break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation log.
// ---------------------------------------------------------------------------

inline std::string eval_csv_header() {
  return "ordinal,stage,f,h,n_viol_nonquant,hidden_event,sim_calls_used";
}

inline std::string eval_csv_row(std::uint64_t ordinal, const PointEvaluation& pe) {
  std::string row = std::to_string(ordinal);
  row += ',';
  row += stage_name(pe.stage);
  row += ',';
  row += format_double(pe.f);
  row += ',';
  row += format_double(pe.h);
  row += ',';
  row += std::to_string(pe.n_viol_nonquant);
  row += ',';
  row += pe.hidden_event ? '1' : '0';
  row += ',';
  row += std::to_string(pe.sim_calls_used);
  return row;
}

}  // namespace qrak
