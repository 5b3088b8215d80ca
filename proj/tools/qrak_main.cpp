// Command-line front end: classify constraint classes, validate problem
// files, run solves with report output, and print reformulation hints.
//
// Exit codes are a stable contract: 0 success (solve: acceptable solution),
// 2 invalid instance or unusable configuration, 3 warnings under
// validate --strict, 4 no valid solution, 5 simulation spawn failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrak/dsl.hpp"
#include "qrak/solver.hpp"

namespace fs = std::filesystem;
using namespace qrak;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitStrictWarnings = 3;
constexpr int kExitNoSolution = 4;
constexpr int kExitSpawnFailure = 5;

void print_diagnostics(const std::vector<Diagnostic>& ds, std::ostream& os) {
  for (const auto& d : ds) os << to_string(d) << "\n";
}

/// Parses a file; the result already carries validation diagnostics. On any
/// error prints them all to stderr and returns nothing so callers can exit 2.
std::optional<ProblemInstance> load_instance(const std::string& path) {
  auto parse = parse_problem_file(path);
  if (parse.ok()) return std::move(*parse.instance);
  print_diagnostics(parse.diagnostics, std::cerr);
  return std::nullopt;
}

std::string pad(std::string s, std::size_t w) {
  s.resize(std::max(s.size(), w), ' ');
  return s;
}

std::string class_axes(const ConstraintClass& c) {
  std::string out = c.quantifiable() ? "quantifiable" : "nonquantifiable";
  out += c.relaxable() ? ", relaxable" : ", unrelaxable";
  out += c.simulation_based() ? ", simulation" : ", a priori";
  out += c.hidden() ? ", hidden" : ", known";
  return out;
}

int cmd_classify(const std::string& path, bool legend) {
  auto inst = load_instance(path);
  if (!inst) return kExitInvalid;

  std::size_t w_name = 10, w_kind = 4;
  for (const auto& c : inst->constraints) {
    w_name = std::max(w_name, c.name.size());
    w_kind = std::max(w_kind, std::string(constraint_kind_name(c.kind)).size());
  }
  std::cout << pad("constraint", w_name) << "  class  leaf  " << pad("kind", w_kind)
            << "  binding\n";
  for (const auto& c : inst->constraints) {
    std::cout << pad(c.name, w_name) << "  " << pad(c.cls.code(), 5) << "  "
              << pad(std::to_string(c.cls.leaf_index()), 4) << "  "
              << pad(constraint_kind_name(c.kind), w_kind) << "  " << detail::render_body(c)
              << "\n";
  }

  if (legend) {
    std::cout << "\nleaf  code  axes\n";
    for (const auto& c : enumerate_classes())
      std::cout << pad(std::to_string(c.leaf_index()), 4) << "  " << pad(c.code(), 4) << "  "
                << class_axes(c) << "\n";
  }
  return kExitOk;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    out += ch;
    if (ch == '"') out += '"';
  }
  out += '"';
  return out;
}

int cmd_validate(const std::string& path, bool strict, const std::string& format) {
  auto parse = parse_problem_file(path);
  const std::vector<Diagnostic>& all = parse.diagnostics;

  if (format == "csv") {
    std::cout << "severity,code,line,col,message\n";
    for (const auto& d : all)
      std::cout << severity_name(d.severity) << ',' << d.code << ',' << d.line << ',' << d.col
                << ',' << csv_quote(d.message) << "\n";
  } else {
    print_diagnostics(all, std::cout);
    if (all.empty()) std::cout << "ok\n";
  }

  if (has_errors(all)) return kExitInvalid;
  if (strict && has_warnings(all)) return kExitStrictWarnings;
  return kExitOk;
}

int cmd_hints(const std::string& path) {
  auto parse = parse_problem_file(path);
  if (!parse.instance) {
    print_diagnostics(parse.diagnostics, std::cerr);
    return kExitInvalid;
  }

  // Hints print even for instances validation rejects: an availability
  // mismatch is exactly the situation the advice addresses.
  auto hints = reformulation_hints(*parse.instance);
  if (hints.empty()) {
    std::cout << "no reformulation hints\n";
  } else {
    for (const auto& h : hints)
      std::cout << h.constraint << ": " << h.from_code << " (leaf " << h.from_leaf << ") -> "
                << h.to_code << " (leaf " << h.to_leaf << "): " << h.reason << "\n";
  }

  if (!parse.ok()) {
    print_diagnostics(parse.diagnostics, std::cerr);
    return kExitInvalid;
  }
  return kExitOk;
}

Point default_start(const ProblemInstance& inst) {
  Point x;
  x.reserve(inst.variables.size());
  for (const auto& v : inst.variables) {
    const double lo = v.effective_lower(), hi = v.effective_upper();
    if (std::isfinite(lo) && std::isfinite(hi)) x.push_back((lo + hi) / 2.0);
    else if (std::isfinite(lo)) x.push_back(lo);
    else if (std::isfinite(hi)) x.push_back(hi);
    else x.push_back(0.0);
  }
  return x;
}

bool write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  os << content;
  os.flush();
  return static_cast<bool>(os);
}

struct SolveFlags {
  std::string path;
  std::vector<double> x0;
  double delta0 = 1.0;
  double delta_min = 1e-9;
  std::uint64_t budget_evals = 20000;
  std::uint64_t budget_sims = 0;  // unlimited unless given
  std::uint32_t seed = 0;
  std::string out = "qrak_out";
  bool skip_sim = false;
  bool no_projection = false;
  bool restoration = false;
  bool zero_budget = false;  // an explicit 0 in either budget flag
};

int cmd_solve(const SolveFlags& fl) {
  auto inst = load_instance(fl.path);
  if (!inst) return kExitInvalid;

  if (fl.zero_budget) {
    std::cerr << "no valid solution: the budget is zero\n";
    return kExitNoSolution;
  }

  SolverOptions opts;
  opts.x0 = fl.x0.empty() ? default_start(*inst) : Point(fl.x0.begin(), fl.x0.end());
  if (opts.x0.size() != static_cast<std::size_t>(inst->dimension())) {
    std::cerr << "--x0 has " << opts.x0.size() << " coordinates; the problem has "
              << inst->dimension() << "\n";
    return kExitInvalid;
  }
  opts.delta0 = fl.delta0;
  opts.delta_min = fl.delta_min;
  opts.max_evaluations = fl.budget_evals;
  opts.max_simulations = fl.budget_sims;
  opts.seed = fl.seed;
  opts.use_projection = !fl.no_projection;
  opts.restoration = fl.restoration;
  opts.eval_policy.skip_sim_on_relaxable_apriori_violation = fl.skip_sim;

  const fs::path out_dir = fl.out;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory '" << out_dir.string() << "': " << ec.message()
              << "\n";
    return kExitInvalid;
  }

  SimRunner runner((out_dir / "transcripts").string());
  try {
    Solver solver(*inst, runner, std::move(opts));
    const SolveReport rep = solver.solve();

    bool wrote = write_file(out_dir / "history.csv", history_csv(rep));
    wrote = write_file(out_dir / "report.txt", report_text(rep)) && wrote;
    wrote = write_file(out_dir / "policy_trace.txt", policy_trace_text(rep)) && wrote;
    if (!wrote) {
      std::cerr << "cannot write reports under '" << out_dir.string() << "'\n";
      return kExitInvalid;
    }

    const PointEvaluation* best = rep.solution     ? &*rep.solution
                                  : rep.best_feasible ? &*rep.best_feasible
                                  : rep.best_infeasible ? &*rep.best_infeasible
                                                        : nullptr;
    std::cout << "status: " << solve_status_name(rep.status) << "\n";
    if (best)
      std::cout << "best: x = " << format_point(best->x) << "  f = " << format_double(best->f)
                << "  h = " << format_double(best->h) << "\n";
    else
      std::cout << "best: none\n";
    std::cout << "evaluations: " << rep.counters.evaluations
              << " (rejected a priori: " << rep.counters.rejected_apriori
              << ", simulations skipped: " << rep.counters.sims_skipped << ")\n";
    std::cout << "simulations: " << rep.counters.sim_executions << " executed, "
              << rep.counters.sim_cache_hits << " cache hits\n";
    std::cout << "reports: " << (out_dir / "history.csv").string() << ", "
              << (out_dir / "report.txt").string() << ", "
              << (out_dir / "policy_trace.txt").string() << "\n";
    return rep.status == SolveStatus::SolvedAcceptable ? kExitOk : kExitNoSolution;
  } catch (const InfeasibleStart& e) {
    std::cerr << "no valid solution: " << e.what() << "\n";
    return kExitNoSolution;
  } catch (const SpawnFailure& e) {
    std::cerr << "simulation spawn failure: " << e.what() << "\n";
    return kExitSpawnFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"direct search over classified constraints"};
  app.require_subcommand(1);

  std::string workdir;
  app.add_option("--workdir", workdir,
                 "change to this directory first; all relative paths resolve there");

  std::string classify_path;
  bool legend = false;
  auto* classify = app.add_subcommand("classify", "print each constraint's class and binding");
  classify->add_option("file", classify_path, "problem file")->required();
  classify->add_flag("--legend", legend, "append the nine-class legend");

  std::string validate_path, format = "text";
  bool strict = false;
  auto* validate_cmd = app.add_subcommand("validate", "parse and validate a problem file");
  validate_cmd->add_option("file", validate_path, "problem file")->required();
  validate_cmd->add_flag("--strict", strict, "warnings fail with exit 3");
  validate_cmd->add_option("--format", format, "diagnostic format")
      ->check(CLI::IsMember({"text", "csv"}));

  SolveFlags fl;
  auto* solve = app.add_subcommand("solve", "run the search and write reports");
  solve->add_option("file", fl.path, "problem file")->required();
  solve->add_option("--x0", fl.x0, "start point, comma-separated (default: box midpoints)")
      ->delimiter(',');
  solve->add_option("--delta0", fl.delta0, "initial frame size")->check(CLI::PositiveNumber);
  solve->add_option("--delta-min", fl.delta_min, "terminal frame size")
      ->check(CLI::PositiveNumber);
  auto* be = solve->add_option("--budget-evals", fl.budget_evals,
                               "max point evaluations (default 20000)");
  auto* bs = solve->add_option("--budget-sims", fl.budget_sims,
                               "max fresh simulation executions (default unlimited)");
  solve->add_option("--seed", fl.seed, "recorded in reports; the search is deterministic");
  solve->add_option("--out", fl.out, "report directory (default qrak_out)");
  solve->add_flag("--skip-sim-on-relaxable-apriori", fl.skip_sim,
                  "skip simulations for points already violating relaxable a priori constraints");
  solve->add_flag("--no-projection", fl.no_projection,
                  "reject bound violations instead of clamping onto the bound");
  solve->add_flag("--restoration", fl.restoration,
                  "recover from an inadmissible start before optimizing");

  std::string hints_path;
  auto* hints = app.add_subcommand("hints", "print reformulation suggestions");
  hints->add_option("file", hints_path, "problem file")->required();

  CLI11_PARSE(app, argc, argv);

  if (!workdir.empty()) {
    std::error_code ec;
    fs::current_path(workdir, ec);
    if (ec) {
      std::cerr << "cannot enter workdir '" << workdir << "': " << ec.message() << "\n";
      return kExitInvalid;
    }
  }

  if (app.got_subcommand(classify)) return cmd_classify(classify_path, legend);
  if (app.got_subcommand(validate_cmd)) return cmd_validate(validate_path, strict, format);
  if (app.got_subcommand(solve)) {
    fl.zero_budget = (be->count() > 0 && fl.budget_evals == 0) ||
                     (bs->count() > 0 && fl.budget_sims == 0);
    return cmd_solve(fl);
  }
  if (app.got_subcommand(hints)) return cmd_hints(hints_path);
  return kExitOk;
}
