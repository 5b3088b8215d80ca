#pragma once

// Simulation harness: launches black-box executables (or registered
// in-process functions), speaks the wire protocol, classifies run outcomes,
// caches by exact input, writes per-execution transcripts, and interprets
// outcomes into per-constraint results.
//
// Wire protocol. The harness writes one coordinate per line to the
// black box's stdin — reals as shortest round-trip decimals, categorical
// coordinates as their label text — and reads whitespace-separated output
// values from stdout. The literal token "NaN" (any case) is accepted as an
// unusable-but-present output. "{k}" in an argv word is replaced by the k-th
// coordinate's text. Exit code 0 means the run finished; documented nonzero
// codes signal specific constraint violations; anything else is a crash.

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <errno.h>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "qrak/format.hpp"
#include "qrak/problem.hpp"

namespace qrak {

/// A harness malfunction (as opposed to a black box misbehaving): the
/// process could not be spawned, an in-process simulation is missing, a
/// point cannot be serialized. These propagate as exceptions; they are never
/// folded into constraint results.
class EvaluationFault : public std::runtime_error {
 public:
  explicit EvaluationFault(const std::string& what) : std::runtime_error(what) {}
};

class SpawnFailure : public EvaluationFault {
 public:
  explicit SpawnFailure(const std::string& what) : EvaluationFault(what) {}
};

enum class SimStatus { Completed, PartialOutputs, ErrorCode, Crashed, TimedOut };

inline const char* status_name(SimStatus s) {
  switch (s) {
    case SimStatus::Completed: return "completed";
    case SimStatus::PartialOutputs: return "partial-outputs";
    case SimStatus::ErrorCode: return "error-code";
    case SimStatus::Crashed: return "crashed";
    case SimStatus::TimedOut: return "timed-out";
  }
  return "?";
}

struct SimOutcome {
  std::string sim_id;
  SimStatus status = SimStatus::Crashed;
  int exit_code = 0;    // meaningful when the process exited
  int term_signal = 0;  // nonzero when terminated by a signal
  // One slot per declared output: disengaged = missing, engaged non-finite =
  // the box printed NaN (or the value overflowed), engaged finite = usable.
  std::vector<std::optional<double>> outputs;
  double elapsed_seconds = 0.0;
  std::string transcript;  // file path under the run directory, or inline text
  bool from_cache = false;
};

/// Per-constraint interpretation of one simulation outcome.
struct EvalResult {
  enum class Kind {
    Quantified,  // info holds the measure
    Boolean,     // satisfied holds the decision
    Unknown,     // the run left this constraint undetermined (conservative)
    Hidden,      // not a declared constraint at all: a hidden-constraint event
  };
  std::string constraint;  // empty for Hidden
  Kind kind = Kind::Unknown;
  ViolationInfo info;
  bool satisfied = false;
  std::string note;
};

// ---------------------------------------------------------------------------
// In-process simulations ("inproc:<name>" commands) for fast tests.
// ---------------------------------------------------------------------------

struct InprocResult {
  int exit_code = 0;
  bool crashed = false;       // pretend the process died on a signal
  std::string stdout_text;
  double elapsed_seconds = -1.0;  // < 0: use the measured wall time
};

using InprocFn = std::function<InprocResult(const Point&)>;

class InprocRegistry {
 public:
  static InprocRegistry& global() {
    static InprocRegistry reg;
    return reg;
  }
  void add(const std::string& name, InprocFn fn) {
    std::lock_guard<std::mutex> lock(mu_);
    fns_[name] = std::move(fn);
  }
  std::optional<InprocFn> find(const std::string& name) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = fns_.find(name);
    if (it == fns_.end()) return std::nullopt;
    return it->second;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, InprocFn> fns_;
};

// ---------------------------------------------------------------------------
// Process execution.
// ---------------------------------------------------------------------------

namespace harness_detail {

struct ProcResult {
  enum class Kind { Exited, Signaled, TimedOut } kind = Kind::Exited;
  int exit_code = 0;
  int signal = 0;
  std::string out, err;
  double elapsed = 0.0;
};

inline void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // EPIPE: the child exited without reading; its problem, not ours
    }
    off += static_cast<std::size_t>(n);
  }
}

/// Runs argv with stdin_data on its standard input, capturing stdout and
/// stderr, killing the whole process group at the deadline.
/// timeout_seconds <= 0 disables the watchdog. Throws SpawnFailure when the
/// executable cannot be launched at all.
inline ProcResult run_process(const std::vector<std::string>& argv,
                              const std::string& stdin_data, double timeout_seconds) {
  int in_pipe[2], out_pipe[2], err_pipe[2], status_pipe[2];
  if (::pipe(in_pipe) || ::pipe(out_pipe) || ::pipe(err_pipe) || ::pipe(status_pipe))
    throw SpawnFailure("pipe: " + std::string(std::strerror(errno)));
  ::fcntl(status_pipe[1], F_SETFD, FD_CLOEXEC);

  // Block SIGPIPE around the stdin write; a fast-exiting child must not
  // kill the harness.
  ::signal(SIGPIPE, SIG_IGN);

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw SpawnFailure("fork: " + std::string(std::strerror(errno)));

  if (pid == 0) {
    ::setpgid(0, 0);  // own process group, so the watchdog can kill helpers too
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1],
                   status_pipe[0]})
      ::close(fd);
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    ::execvp(cargv[0], cargv.data());
    const int err = errno;
    (void)!::write(status_pipe[1], &err, sizeof err);
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  ::close(status_pipe[1]);

  // The point is tiny relative to the pipe buffer, so this never blocks on
  // a live child.
  write_all(in_pipe[1], stdin_data);
  ::close(in_pipe[1]);

  // The exec status pipe reports launch failure (errno bytes) or success
  // (EOF via CLOEXEC).
  int exec_errno = 0;
  {
    ssize_t n;
    do {
      n = ::read(status_pipe[0], &exec_errno, sizeof exec_errno);
    } while (n < 0 && errno == EINTR);
    ::close(status_pipe[0]);
    if (n > 0) {
      int wstatus = 0;
      ::waitpid(pid, &wstatus, 0);
      ::close(out_pipe[0]);
      ::close(err_pipe[0]);
      throw SpawnFailure("cannot execute '" + argv[0] +
                         "': " + std::string(std::strerror(exec_errno)));
    }
  }

  ProcResult result;
  bool killed = false;
  const auto deadline =
      timeout_seconds > 0
          ? start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(timeout_seconds))
          : std::chrono::steady_clock::time_point::max();

  struct Stream {
    int fd;
    std::string* sink;
    bool open;
  };
  Stream streams[2] = {{out_pipe[0], &result.out, true}, {err_pipe[0], &result.err, true}};

  char buf[4096];
  while (streams[0].open || streams[1].open) {
    pollfd fds[2];
    nfds_t nfds = 0;
    for (auto& s : streams)
      if (s.open) fds[nfds++] = {s.fd, POLLIN, 0};

    int wait_ms = -1;
    if (!killed && timeout_seconds > 0) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) {
        ::kill(-pid, SIGKILL);
        killed = true;
        wait_ms = 200;  // drain whatever remains, briefly
      } else {
        const auto remain =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        wait_ms = static_cast<int>(remain) + 1;
      }
    } else if (killed) {
      wait_ms = 200;
    }

    const int rc = ::poll(fds, nfds, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) {
      if (killed) break;  // drained long enough after the kill
      continue;           // loop re-checks the deadline
    }
    for (nfds_t i = 0; i < nfds; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
      for (auto& s : streams) {
        if (s.fd != fds[i].fd || !s.open) continue;
        const ssize_t n = ::read(s.fd, buf, sizeof buf);
        if (n > 0) {
          s.sink->append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (n < 0 && errno != EINTR)) {
          ::close(s.fd);
          s.open = false;
        }
      }
    }
  }
  for (auto& s : streams)
    if (s.open) ::close(s.fd);

  if (killed) ::kill(-pid, SIGKILL);  // belt and braces before reaping
  int wstatus = 0;
  while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
  }
  result.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (killed) {
    result.kind = ProcResult::Kind::TimedOut;
    if (result.elapsed < timeout_seconds) result.elapsed = timeout_seconds;
  } else if (WIFSIGNALED(wstatus)) {
    result.kind = ProcResult::Kind::Signaled;
    result.signal = WTERMSIG(wstatus);
  } else {
    result.kind = ProcResult::Kind::Exited;
    result.exit_code = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : 127;
  }
  return result;
}

inline bool is_nan_token(const std::string& token) {
  if (token.size() != 3) return false;
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  return lower(token[0]) == 'n' && lower(token[1]) == 'a' && lower(token[2]) == 'n';
}

/// Parses the first `arity` whitespace-separated stdout tokens. A token that
/// is neither a number nor "NaN" garbles the stream: it and everything after
/// it count as missing.
inline std::vector<std::optional<double>> parse_outputs(const std::string& text, int arity) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(arity));
  std::size_t i = 0, slot = 0;
  while (slot < out.size() && i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const std::string token = text.substr(i, j - i);
    i = j;
    if (is_nan_token(token)) {
      out[slot++] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const char* b = token.c_str();
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (e == b || *e != '\0') break;  // garbled stream
    out[slot++] = v;
  }
  return out;
}

}  // namespace harness_detail

// ---------------------------------------------------------------------------
// Runner.
// ---------------------------------------------------------------------------

struct RunnerCounters {
  std::uint64_t requests = 0;    // cached_evaluate calls
  std::uint64_t cache_hits = 0;
  std::uint64_t executions = 0;  // actual launches (process or in-process)
};

class SimRunner {
 public:
  /// `run_dir` (optional) receives one transcript file per execution; when
  /// empty, transcripts are kept inline in the outcome instead.
  explicit SimRunner(std::string run_dir = "") : run_dir_(std::move(run_dir)) {
    if (!run_dir_.empty()) std::filesystem::create_directories(run_dir_);
  }

  /// One coordinate per line: reals and integers as shortest round-trip
  /// decimals, categorical coordinates as their label.
  static std::string serialize_point(const std::vector<Variable>& vars, const Point& x) {
    if (vars.size() != x.size())
      throw EvaluationFault("point dimension " + std::to_string(x.size()) +
                            " does not match the declared " + std::to_string(vars.size()) +
                            " variables");
    std::string out;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].kind == VarKind::Categorical) {
        const long ord = std::lround(x[i]);
        if (ord < 0 || static_cast<std::size_t>(ord) >= vars[i].categories.size())
          throw EvaluationFault("coordinate " + std::to_string(i + 1) +
                                " selects no category of '" + vars[i].name + "'");
        out += vars[i].categories[static_cast<std::size_t>(ord)];
      } else {
        out += format_double(x[i]);
      }
      out += '\n';
    }
    return out;
  }

  /// Executes the simulation, bypassing the cache.
  SimOutcome run(const SimulationSpec& spec, const std::vector<Variable>& vars,
                 const Point& x) {
    const std::string stdin_data = serialize_point(vars, x);
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++counters_.executions;
    }
    SimOutcome outcome = spec.in_process() ? run_inproc(spec, x) : run_process(spec, stdin_data);
    outcome.sim_id = spec.id;
    attach_transcript(spec, stdin_data, outcome);
    return outcome;
  }

  /// Executes through the exact-input cache: the same simulation at the same
  /// serialized point is never launched twice.
  SimOutcome evaluate(const SimulationSpec& spec, const std::vector<Variable>& vars,
                      const Point& x) {
    const std::string key = spec.id + '\n' + serialize_point(vars, x);
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++counters_.requests;
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        ++counters_.cache_hits;
        SimOutcome hit = it->second;
        hit.from_cache = true;
        return hit;
      }
    }
    SimOutcome fresh = run(spec, vars, x);
    {
      std::lock_guard<std::mutex> lock(mu_);
      cache_.emplace(key, fresh);
    }
    return fresh;
  }

  RunnerCounters counters() const {
    std::lock_guard<std::mutex> lock(mu_);
    return counters_;
  }

  const std::string& run_dir() const { return run_dir_; }

 private:
  SimOutcome run_process(const SimulationSpec& spec, const std::string& stdin_data) {
    // Substitute "{k}" placeholders with coordinate text (1-based).
    std::vector<std::string> argv = spec.argv;
    std::vector<std::string> lines;
    {
      std::size_t start = 0;
      while (start < stdin_data.size()) {
        const std::size_t nl = stdin_data.find('\n', start);
        lines.push_back(stdin_data.substr(start, nl - start));
        start = nl + 1;
      }
    }
    for (auto& arg : argv) {
      for (std::size_t k = 0; k < lines.size(); ++k) {
        const std::string pat = "{" + std::to_string(k + 1) + "}";
        std::size_t at;
        while ((at = arg.find(pat)) != std::string::npos)
          arg.replace(at, pat.size(), lines[k]);
      }
    }

    auto pr = harness_detail::run_process(argv, stdin_data, spec.timeout_seconds);
    return classify(spec, pr);
  }

  SimOutcome run_inproc(const SimulationSpec& spec, const Point& x) {
    const std::string name = spec.argv.front().substr(std::string("inproc:").size());
    auto fn = InprocRegistry::global().find(name);
    if (!fn)
      throw SpawnFailure("no in-process simulation registered under '" + name + "'");
    const auto start = std::chrono::steady_clock::now();
    InprocResult r;
    try {
      r = (*fn)(x);
    } catch (const std::exception& e) {
      throw SpawnFailure("in-process simulation '" + name + "' threw: " + e.what());
    }
    harness_detail::ProcResult pr;
    pr.elapsed = r.elapsed_seconds >= 0
                     ? r.elapsed_seconds
                     : std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                           .count();
    pr.out = r.stdout_text;
    if (spec.has_timeout() && pr.elapsed >= spec.timeout_seconds) {
      pr.kind = harness_detail::ProcResult::Kind::TimedOut;
      pr.out.clear();
    } else if (r.crashed) {
      pr.kind = harness_detail::ProcResult::Kind::Signaled;
      pr.signal = SIGSEGV;
    } else {
      pr.kind = harness_detail::ProcResult::Kind::Exited;
      pr.exit_code = r.exit_code;
    }
    return classify(spec, pr);
  }

  static SimOutcome classify(const SimulationSpec& spec, const harness_detail::ProcResult& pr) {
    SimOutcome o;
    o.elapsed_seconds = pr.elapsed;
    o.exit_code = pr.exit_code;
    o.term_signal = pr.signal;
    o.outputs.assign(static_cast<std::size_t>(spec.output_arity), std::nullopt);
    switch (pr.kind) {
      case harness_detail::ProcResult::Kind::TimedOut:
        o.status = SimStatus::TimedOut;
        break;
      case harness_detail::ProcResult::Kind::Signaled:
        o.status = SimStatus::Crashed;
        break;
      case harness_detail::ProcResult::Kind::Exited:
        if (pr.exit_code == 0) {
          o.outputs = harness_detail::parse_outputs(pr.out, spec.output_arity);
          bool all_usable = true;
          for (const auto& v : o.outputs)
            if (!v || !std::isfinite(*v)) all_usable = false;
          o.status = all_usable ? SimStatus::Completed : SimStatus::PartialOutputs;
        } else if (spec.error_codes.count(pr.exit_code)) {
          o.status = SimStatus::ErrorCode;  // a documented, interpretable failure
        } else {
          o.status = SimStatus::Crashed;
        }
        break;
    }
    return o;
  }

  void attach_transcript(const SimulationSpec& spec, const std::string& stdin_data,
                         SimOutcome& o) {
    std::string text;
    text += "sim: " + spec.id + "\n";
    text += "argv:";
    for (const auto& a : spec.argv) text += " " + a;
    text += "\n";
    text += "status: " + std::string(status_name(o.status)) + "\n";
    if (o.term_signal) text += "signal: " + std::to_string(o.term_signal) + "\n";
    else text += "exit: " + std::to_string(o.exit_code) + "\n";
    text += "elapsed: " + format_double(o.elapsed_seconds) + "s\n";
    text += "--- stdin ---\n" + stdin_data;
    text += "--- outputs ---\n";
    for (const auto& v : o.outputs) {
      text += v ? format_double(*v) : std::string("(missing)");
      text += "\n";
    }

    std::uint64_t ordinal;
    {
      std::lock_guard<std::mutex> lock(mu_);
      ordinal = ++ordinal_;
    }
    if (run_dir_.empty()) {
      o.transcript = std::move(text);
      return;
    }
    char name[32];
    std::snprintf(name, sizeof name, "sim_%06llu.txt", static_cast<unsigned long long>(ordinal));
    const std::filesystem::path path = std::filesystem::path(run_dir_) / name;
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f) {
      std::fwrite(text.data(), 1, text.size(), f);
      std::fclose(f);
    }
    o.transcript = path.string();
  }

  std::string run_dir_;
  mutable std::mutex mu_;
  std::map<std::string, SimOutcome> cache_;
  RunnerCounters counters_;
  std::uint64_t ordinal_ = 0;
};

// ---------------------------------------------------------------------------
// Outcome interpretation.
// ---------------------------------------------------------------------------

/// Maps one simulation outcome onto the instance's constraints bound to that
/// simulation.
///
///   Completed        -> every binding evaluates from its output
///   PartialOutputs   -> usable outputs evaluate; missing/NaN become Unknown
///   ErrorCode        -> the documented constraint is violated (boolean);
///                       other output bindings are Unknown; no hidden event
///   Crashed          -> a single hidden-constraint event
///   TimedOut         -> with a declared time constraint: that constraint is
///                       infeasible (magnitude unquantified) and the rest are
///                       Unknown; with none: a hidden-constraint event
///
/// Unknown results are conservative: the evaluator treats them as
/// unrelaxable violations.
inline std::vector<EvalResult> interpret_outcome(const SimOutcome& o,
                                                 const ProblemInstance& inst) {
  const SimulationSpec* spec = inst.find_simulation(o.sim_id);
  if (!spec) throw std::logic_error("outcome from undeclared simulation '" + o.sim_id + "'");

  std::vector<const Constraint*> bound;
  for (const auto& c : inst.constraints)
    if (c.sim && c.sim->sim == o.sim_id) bound.push_back(&c);

  std::vector<EvalResult> results;
  auto hidden = [&](std::string note) {
    EvalResult r;
    r.kind = EvalResult::Kind::Hidden;
    r.note = std::move(note);
    results.push_back(std::move(r));
  };
  auto unknown = [&](const Constraint& c, std::string note) {
    EvalResult r;
    r.constraint = c.name;
    r.kind = EvalResult::Kind::Unknown;
    r.note = std::move(note);
    results.push_back(std::move(r));
  };
  auto decided = [&](const Constraint& c, double raw) {
    EvalResult r;
    r.constraint = c.name;
    if (c.cls.quantifiable()) {
      r.kind = EvalResult::Kind::Quantified;
      r.info = violation_measure(c, raw);
      r.satisfied = r.info.feasible;
    } else {
      r.kind = EvalResult::Kind::Boolean;
      r.satisfied = decide_satisfied(c, raw);
    }
    results.push_back(std::move(r));
  };
  auto boolean = [&](const Constraint& c, bool satisfied, std::string note = "") {
    EvalResult r;
    r.constraint = c.name;
    r.kind = EvalResult::Kind::Boolean;
    r.satisfied = satisfied;
    r.note = std::move(note);
    results.push_back(std::move(r));
  };
  auto from_output = [&](const Constraint& c) {
    const auto& slot = o.outputs[static_cast<std::size_t>(c.sim->output_index)];
    if (!slot) {
      unknown(c, "output " + std::to_string(c.sim->output_index + 1) + " missing");
      return;
    }
    if (!std::isfinite(*slot)) {
      unknown(c, "output " + std::to_string(c.sim->output_index + 1) + " is NaN");
      return;
    }
    decided(c, c.sim->raw_from_output(*slot));
  };
  auto from_elapsed = [&](const Constraint& c) {
    decided(c, o.elapsed_seconds - spec->timeout_seconds);
  };

  switch (o.status) {
    case SimStatus::Completed:
    case SimStatus::PartialOutputs:
      for (const Constraint* c : bound) {
        switch (c->sim->source) {
          case SimSource::Output: from_output(*c); break;
          case SimSource::Elapsed: from_elapsed(*c); break;
          case SimSource::ErrorFlag: boolean(*c, true); break;
        }
      }
      return results;

    case SimStatus::ErrorCode: {
      const std::string& culprit = spec->error_codes.at(o.exit_code);
      for (const Constraint* c : bound) {
        if (c->name == culprit) {
          boolean(*c, false, "exit code " + std::to_string(o.exit_code));
          continue;
        }
        switch (c->sim->source) {
          case SimSource::Output:
            unknown(*c, "run exited with code " + std::to_string(o.exit_code));
            break;
          case SimSource::Elapsed:
            from_elapsed(*c);
            break;
          case SimSource::ErrorFlag:
            boolean(*c, true);  // its own code did not fire
            break;
        }
      }
      return results;
    }

    case SimStatus::Crashed:
      hidden(o.term_signal ? "terminated by signal " + std::to_string(o.term_signal)
                           : "undocumented exit code " + std::to_string(o.exit_code));
      return results;

    case SimStatus::TimedOut: {
      bool has_time_constraint = false;
      for (const Constraint* c : bound)
        if (c->sim->source == SimSource::Elapsed) has_time_constraint = true;
      if (!has_time_constraint) {
        hidden("wall-clock timeout with no declared time constraint");
        return results;
      }
      for (const Constraint* c : bound) {
        if (c->sim->source == SimSource::Elapsed) {
          // The run was killed, so the true overshoot is unknowable; the
          // decision is not.
          EvalResult r;
          r.constraint = c->name;
          r.note = "killed at the timeout";
          if (c->cls.quantifiable()) {
            r.kind = EvalResult::Kind::Quantified;
            r.info = ViolationInfo{false, std::nullopt, std::nullopt};
          } else {
            r.kind = EvalResult::Kind::Boolean;
            r.satisfied = false;
          }
          results.push_back(std::move(r));
        } else {
          unknown(*c, "timed out");
        }
      }
      return results;
    }
  }
  return results;
}

/// The objective value carried by an outcome, when the run completed and the
/// bound output is usable.
inline std::optional<double> objective_from_outcome(const SimOutcome& o, const SimBinding& b) {
  if (o.status != SimStatus::Completed) return std::nullopt;
  const auto& slot = o.outputs[static_cast<std::size_t>(b.output_index)];
  if (!slot || !std::isfinite(*slot)) return std::nullopt;
  return *slot;
}

}  // namespace qrak
