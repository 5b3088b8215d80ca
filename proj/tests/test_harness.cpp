#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "qrak/dsl.hpp"
#include "qrak/harness.hpp"

using namespace qrak;

namespace {

std::string fixture(const std::string& name) {
  return std::string(QRAK_FIXTURE_DIR) + "/" + name;
}

ProblemInstance parsed_clean(const std::string& text) {
  auto parse = parse_problem(text);
  for (const auto& d : parse.diagnostics) INFO(to_string(d));
  REQUIRE(parse.ok());
  return *parse.instance;
}

/// Instance bound to bb_status: objective out 1, a relaxable value out 2, an
/// unrelaxable flag out 3, a documented exit code, and a time constraint.
ProblemInstance status_instance(const std::string& mode, double timeout = 5.0,
                                bool with_time_constraint = true) {
  std::string text = "problem status_demo\n";
  text += "var x1 real [-10, 10]\n";
  text += "var x2 real [-10, 10]\n";
  text += "simulation st cmd \"" + fixture("bb_status") + " " + mode + "\" outputs 3 timeout " +
          format_double(timeout) + "\n";
  text += "minimize \"st:out 1\"\n";
  text += "constraint budget QRSK \"st:out 2 <= 0\"\n";
  text += "constraint flag NUSK \"st:out 3 <= 0\"\n";
  text += "constraint seg NUSK \"st:errcode 7\"\n";
  if (with_time_constraint) text += "constraint clock QRSK \"st:time\"\n";
  return parsed_clean(text);
}

const EvalResult& result_for(const std::vector<EvalResult>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.constraint == name) return r;
  FAIL("no result for constraint '" + name + "'");
  static EvalResult dummy;
  return dummy;
}

SimOutcome outcome_with(const ProblemInstance& inst, SimStatus status,
                        std::vector<std::optional<double>> outputs, int exit_code = 0,
                        int term_signal = 0, double elapsed = 0.1) {
  SimOutcome o;
  o.sim_id = inst.simulations.front().id;
  o.status = status;
  o.exit_code = exit_code;
  o.term_signal = term_signal;
  o.outputs = std::move(outputs);
  o.elapsed_seconds = elapsed;
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------
// Wire protocol.
// ---------------------------------------------------------------------------

TEST_CASE("points serialize one coordinate per line") {
  std::vector<Variable> vars(4);
  vars[0] = {"x1", VarKind::Real, -10, 10, {}};
  vars[1] = {"n", VarKind::Integer, 0, 9, {}};
  vars[2] = {"b", VarKind::Binary, 0, 1, {}};
  vars[3] = {"compiler", VarKind::Categorical, 0, 2, {"gcc", "icc", "msvc"}};

  SECTION("reals, integers, and labels") {
    CHECK(SimRunner::serialize_point(vars, {0.1, 3.0, 1.0, 1.0}) == "0.1\n3\n1\nicc\n");
  }
  SECTION("shortest round-trip decimals, not fixed width") {
    CHECK(SimRunner::serialize_point(vars, {1.0 / 3.0, 0, 0, 0}) ==
          "0.3333333333333333\n0\n0\ngcc\n");
  }
  SECTION("dimension mismatch is a harness fault") {
    CHECK_THROWS_AS(SimRunner::serialize_point(vars, {1.0, 2.0}), EvaluationFault);
  }
  SECTION("an out-of-range category ordinal is a harness fault") {
    CHECK_THROWS_AS(SimRunner::serialize_point(vars, {0, 0, 0, 7.0}), EvaluationFault);
  }
}

TEST_CASE("stdout parsing tolerates NaN and stops at garbage") {
  using harness_detail::parse_outputs;
  SECTION("plain values") {
    auto out = parse_outputs("1 2.5 -3\n", 3);
    REQUIRE(out.size() == 3);
    CHECK(*out[0] == 1.0);
    CHECK(*out[1] == 2.5);
    CHECK(*out[2] == -3.0);
  }
  SECTION("NaN token in any case") {
    auto out = parse_outputs("nan NAN NaN", 3);
    for (const auto& v : out) {
      REQUIRE(v.has_value());
      CHECK(std::isnan(*v));
    }
  }
  SECTION("a garbled token ends the stream") {
    auto out = parse_outputs("1 abc 3", 3);
    CHECK(out[0].has_value());
    CHECK_FALSE(out[1].has_value());
    CHECK_FALSE(out[2].has_value());
  }
  SECTION("missing trailing outputs stay missing") {
    auto out = parse_outputs("1\n", 3);
    CHECK(out[0].has_value());
    CHECK_FALSE(out[1].has_value());
    CHECK_FALSE(out[2].has_value());
  }
}

// ---------------------------------------------------------------------------
// Real processes: one classification per black-box behaviour.
// ---------------------------------------------------------------------------

TEST_CASE("a clean run completes with parsed outputs") {
  auto inst = status_instance("ok");
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {1.0, 2.0});
  CHECK(o.status == SimStatus::Completed);
  CHECK(o.exit_code == 0);
  REQUIRE(o.outputs.size() == 3);
  CHECK(*o.outputs[0] == 1.0);
  CHECK(*o.outputs[1] == 2.5);
  CHECK(*o.outputs[2] == -3.0);
  CHECK(o.transcript.find("status: completed") != std::string::npos);
  CHECK(o.transcript.find("--- stdin ---\n1\n2\n") != std::string::npos);
}

TEST_CASE("NaN or missing outputs classify as partial") {
  auto inst = status_instance("partial");
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {1.0, 2.0});
  CHECK(o.status == SimStatus::PartialOutputs);
  REQUIRE(o.outputs.size() == 3);
  CHECK(*o.outputs[0] == 1.0);
  REQUIRE(o.outputs[1].has_value());
  CHECK(std::isnan(*o.outputs[1]));
  CHECK_FALSE(o.outputs[2].has_value());
}

TEST_CASE("garbled stdout classifies as partial with the tail missing") {
  auto inst = status_instance("garbage");
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {1.0, 2.0});
  CHECK(o.status == SimStatus::PartialOutputs);
  CHECK(o.outputs[0].has_value());
  CHECK_FALSE(o.outputs[1].has_value());
  CHECK_FALSE(o.outputs[2].has_value());
}

TEST_CASE("a documented exit code classifies as an error code") {
  auto inst = status_instance("errcode");
  REQUIRE(inst.simulations[0].error_codes.count(7));
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {1.0, 2.0});
  CHECK(o.status == SimStatus::ErrorCode);
  CHECK(o.exit_code == 7);
}

TEST_CASE("an undocumented exit code classifies as a crash") {
  auto inst = status_instance("badexit");
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {1.0, 2.0});
  CHECK(o.status == SimStatus::Crashed);
  CHECK(o.exit_code == 42);
  CHECK(o.term_signal == 0);
}

TEST_CASE("a signal death classifies as a crash") {
  auto inst = status_instance("crash");
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {1.0, 2.0});
  CHECK(o.status == SimStatus::Crashed);
  CHECK(o.term_signal == SIGABRT);
}

TEST_CASE("the watchdog kills overruns and reports at least the timeout") {
  auto inst = status_instance("spin", 0.3);
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {1.0, 2.0});
  CHECK(o.status == SimStatus::TimedOut);
  CHECK(o.elapsed_seconds >= 0.3);
  CHECK(o.elapsed_seconds < 5.0);  // nowhere near the box's 10s sleep
  for (const auto& v : o.outputs) CHECK_FALSE(v.has_value());
}

TEST_CASE("an unlaunchable command is a spawn failure, not a crash") {
  auto inst = status_instance("ok");
  auto spec = inst.simulations[0];
  spec.argv = {"/nonexistent/black_box_xyz"};
  SimRunner runner;
  CHECK_THROWS_AS(runner.run(spec, inst.variables, {1.0, 2.0}), SpawnFailure);
}

TEST_CASE("command arguments substitute coordinate text") {
  std::string text = "problem argv_demo\n";
  text += "var x1 real [-10, 10]\n";
  text += "simulation st cmd \"" + fixture("bb_status") + " argv {1}\" outputs 1\n";
  text += "minimize \"st:out 1\"\n";
  auto inst = parsed_clean(text);
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {0.5});
  CHECK(o.status == SimStatus::Completed);
  CHECK(*o.outputs[0] == 0.5);
}

// ---------------------------------------------------------------------------
// In-process simulations.
// ---------------------------------------------------------------------------

namespace {

ProblemInstance inproc_instance(const std::string& name, double timeout = 0.0) {
  std::string text = "problem inproc_demo\n";
  text += "var x1 real [-10, 10]\n";
  text += "simulation db cmd \"inproc:" + name + "\" outputs 1";
  if (timeout > 0) text += " timeout " + format_double(timeout);
  text += "\nminimize \"db:out 1\"\n";
  return parsed_clean(text);
}

}  // namespace

TEST_CASE("in-process simulations run without a process") {
  InprocRegistry::global().add("echo2x", [](const Point& x) {
    InprocResult r;
    r.stdout_text = format_double(2.0 * x[0]) + "\n";
    return r;
  });
  auto inst = inproc_instance("echo2x");
  SimRunner runner;
  auto o = runner.run(inst.simulations[0], inst.variables, {3.0});
  CHECK(o.status == SimStatus::Completed);
  CHECK(*o.outputs[0] == 6.0);
}

TEST_CASE("in-process crash and timeout flags map to the same statuses") {
  InprocRegistry::global().add("fragile", [](const Point&) {
    InprocResult r;
    r.crashed = true;
    return r;
  });
  InprocRegistry::global().add("slow", [](const Point&) {
    InprocResult r;
    r.stdout_text = "1\n";
    r.elapsed_seconds = 9.0;  // pretend: no actual sleeping
    return r;
  });

  SimRunner runner;
  auto fragile = inproc_instance("fragile");
  auto of = runner.run(fragile.simulations[0], fragile.variables, {1.0});
  CHECK(of.status == SimStatus::Crashed);
  CHECK(of.term_signal == SIGSEGV);

  auto slow = inproc_instance("slow", 2.0);
  auto os = runner.run(slow.simulations[0], slow.variables, {1.0});
  CHECK(os.status == SimStatus::TimedOut);
  CHECK(os.elapsed_seconds >= 2.0);
  CHECK_FALSE(os.outputs[0].has_value());
}

TEST_CASE("a missing in-process registration is a spawn failure") {
  auto inst = inproc_instance("ghost_never_registered");
  SimRunner runner;
  CHECK_THROWS_AS(runner.run(inst.simulations[0], inst.variables, {1.0}), SpawnFailure);
}

// ---------------------------------------------------------------------------
// Cache and transcripts.
// ---------------------------------------------------------------------------

TEST_CASE("the cache launches each exact point once") {
  InprocRegistry::global().add("counted", [](const Point& x) {
    InprocResult r;
    r.stdout_text = format_double(x[0] * x[0]) + "\n";
    return r;
  });
  auto inst = inproc_instance("counted");
  SimRunner runner;

  auto a = runner.evaluate(inst.simulations[0], inst.variables, {2.0});
  auto b = runner.evaluate(inst.simulations[0], inst.variables, {2.0});
  auto c = runner.evaluate(inst.simulations[0], inst.variables, {3.0});

  CHECK_FALSE(a.from_cache);
  CHECK(b.from_cache);
  CHECK_FALSE(c.from_cache);
  CHECK(*a.outputs[0] == 4.0);
  CHECK(*b.outputs[0] == 4.0);
  CHECK(*c.outputs[0] == 9.0);

  auto n = runner.counters();
  CHECK(n.requests == 3);
  CHECK(n.cache_hits == 1);
  CHECK(n.executions == 2);
}

TEST_CASE("transcripts go to numbered files under the run directory") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("qrak_harness_" + std::to_string(::getpid()));
  fs::remove_all(dir);

  {
    auto inst = status_instance("ok");
    SimRunner runner(dir.string());
    auto o = runner.run(inst.simulations[0], inst.variables, {1.5, -2.0});
    REQUIRE(fs::exists(o.transcript));
    CHECK(fs::path(o.transcript).filename() == "sim_000001.txt");

    std::ifstream in(o.transcript);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("sim: st") != std::string::npos);
    CHECK(text.find("status: completed") != std::string::npos);
    CHECK(text.find("--- stdin ---\n1.5\n-2\n") != std::string::npos);
    CHECK(text.find("2.5") != std::string::npos);

    runner.run(inst.simulations[0], inst.variables, {0.0, 0.0});
    CHECK(fs::exists(dir / "sim_000002.txt"));
  }
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Outcome interpretation.
// ---------------------------------------------------------------------------

TEST_CASE("completed runs decide every bound constraint") {
  auto inst = status_instance("ok");
  auto o = outcome_with(inst, SimStatus::Completed, {5.0, 2.0, 0.0}, 0, 0, 1.25);
  auto rs = interpret_outcome(o, inst);
  REQUIRE(rs.size() == 4);

  const auto& budget = result_for(rs, "budget");
  CHECK(budget.kind == EvalResult::Kind::Quantified);
  CHECK_FALSE(budget.info.feasible);
  CHECK(budget.info.violation == 2.0);

  const auto& flag = result_for(rs, "flag");
  CHECK(flag.kind == EvalResult::Kind::Boolean);
  CHECK(flag.satisfied);

  const auto& seg = result_for(rs, "seg");
  CHECK(seg.kind == EvalResult::Kind::Boolean);
  CHECK(seg.satisfied);

  const auto& clock = result_for(rs, "clock");
  CHECK(clock.kind == EvalResult::Kind::Quantified);
  CHECK(clock.info.feasible);
  CHECK(clock.info.margin == 5.0 - 1.25);
}

TEST_CASE("flipped output bindings quantify from rhs minus output") {
  std::string text = "problem flip_demo\n";
  text += "var x1 real [-10, 10]\n";
  text += "simulation st cmd \"" + fixture("bb_status") + " ok\" outputs 1\n";
  text += "minimize \"x1\"\n";
  text += "constraint floor QRSK \"st:out 1 >= 1.5\"\n";
  auto inst = parsed_clean(text);

  auto o = outcome_with(inst, SimStatus::Completed, {1.0});
  auto rs = interpret_outcome(o, inst);
  const auto& floor = result_for(rs, "floor");
  CHECK_FALSE(floor.info.feasible);
  CHECK(floor.info.violation == 0.5);
}

TEST_CASE("partial runs leave unusable outputs unknown") {
  auto inst = status_instance("partial");
  auto o = outcome_with(inst, SimStatus::PartialOutputs,
                        {1.0, std::nullopt, std::numeric_limits<double>::quiet_NaN()}, 0, 0,
                        0.5);
  auto rs = interpret_outcome(o, inst);

  CHECK(result_for(rs, "budget").kind == EvalResult::Kind::Unknown);
  CHECK(result_for(rs, "flag").kind == EvalResult::Kind::Unknown);
  CHECK(result_for(rs, "seg").satisfied);
  CHECK(result_for(rs, "clock").info.feasible);
}

TEST_CASE("a documented error code violates its constraint and poisons outputs") {
  auto inst = status_instance("errcode");
  auto o = outcome_with(inst, SimStatus::ErrorCode, {std::nullopt, std::nullopt, std::nullopt},
                        7, 0, 0.5);
  auto rs = interpret_outcome(o, inst);

  const auto& seg = result_for(rs, "seg");
  CHECK(seg.kind == EvalResult::Kind::Boolean);
  CHECK_FALSE(seg.satisfied);
  CHECK(seg.note.find("7") != std::string::npos);

  CHECK(result_for(rs, "budget").kind == EvalResult::Kind::Unknown);
  CHECK(result_for(rs, "flag").kind == EvalResult::Kind::Unknown);
  CHECK(result_for(rs, "clock").info.feasible);

  for (const auto& r : rs) CHECK(r.kind != EvalResult::Kind::Hidden);
}

TEST_CASE("a crash is a single hidden-constraint event") {
  auto inst = status_instance("crash");
  auto o = outcome_with(inst, SimStatus::Crashed, {std::nullopt, std::nullopt, std::nullopt},
                        0, SIGSEGV, 0.2);
  auto rs = interpret_outcome(o, inst);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].kind == EvalResult::Kind::Hidden);
  CHECK(rs[0].constraint.empty());
  CHECK(rs[0].note.find("signal") != std::string::npos);
  CHECK_FALSE(rs[0].info.violation.has_value());
  CHECK_FALSE(rs[0].info.margin.has_value());
}

TEST_CASE("a timeout with a declared time constraint is that constraint's violation") {
  auto inst = status_instance("spin", 0.3);
  auto o = outcome_with(inst, SimStatus::TimedOut, {std::nullopt, std::nullopt, std::nullopt},
                        0, 0, 0.3);
  auto rs = interpret_outcome(o, inst);

  const auto& clock = result_for(rs, "clock");
  CHECK(clock.kind == EvalResult::Kind::Quantified);
  CHECK_FALSE(clock.info.feasible);
  CHECK_FALSE(clock.info.violation.has_value());  // the true overshoot is unknowable
  CHECK_FALSE(clock.info.margin.has_value());

  CHECK(result_for(rs, "budget").kind == EvalResult::Kind::Unknown);
  CHECK(result_for(rs, "flag").kind == EvalResult::Kind::Unknown);
  CHECK(result_for(rs, "seg").kind == EvalResult::Kind::Unknown);
  for (const auto& r : rs) CHECK(r.kind != EvalResult::Kind::Hidden);
}

TEST_CASE("a timeout with no declared time constraint is a hidden event") {
  auto inst = status_instance("spin", 0.3, /*with_time_constraint=*/false);
  auto o = outcome_with(inst, SimStatus::TimedOut, {std::nullopt, std::nullopt, std::nullopt},
                        0, 0, 0.3);
  auto rs = interpret_outcome(o, inst);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].kind == EvalResult::Kind::Hidden);
}

TEST_CASE("the objective reads only from completed runs") {
  auto inst = status_instance("ok");
  REQUIRE(inst.objective_sim.has_value());

  auto done = outcome_with(inst, SimStatus::Completed, {5.0, 0.0, 0.0});
  CHECK(objective_from_outcome(done, *inst.objective_sim) == 5.0);

  auto partial = outcome_with(inst, SimStatus::PartialOutputs, {5.0, std::nullopt, 0.0});
  CHECK_FALSE(objective_from_outcome(partial, *inst.objective_sim).has_value());

  auto crashed = outcome_with(inst, SimStatus::Crashed, {std::nullopt, std::nullopt, std::nullopt});
  CHECK_FALSE(objective_from_outcome(crashed, *inst.objective_sim).has_value());
}
