#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "rtt/error.hpp"
#include "rtt/manifest.hpp"
#include "rtt/minilang.hpp"

namespace rtt {

struct Workspace {
  std::filesystem::path root;
  std::string bug_id;
  std::string candidate_position;
};

struct CompileOutcome {
  int compilable = 0;  // {0,1}
  std::string log;
  long long duration_ms = 0;
};

struct PerTestOutcome {
  std::string name;
  bool passed = false;
  std::string log;
};

struct TestOutcome {
  int passed = 0;
  int total = 0;
  std::vector<PerTestOutcome> per_test;
  bool timed_out = false;
};

struct CommandResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
  bool timed_out = false;
  long long duration_ms = 0;
};

// Runs a shell command in cwd with a wall-clock timeout. The child gets its
// own process group so a timeout kills the whole tree.
inline CommandResult run_command(const std::string& command,
                                 const std::filesystem::path& cwd,
                                 double timeout_seconds) {
  using clock = std::chrono::steady_clock;
  CommandResult result;
  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    throw Error(ErrorKind::io, "pipe() failed");
  }
  auto start = clock::now();
  pid_t pid = fork();
  if (pid < 0) throw Error(ErrorKind::io, "fork() failed");
  if (pid == 0) {
    setpgid(0, 0);
    if (!cwd.empty()) {
      if (chdir(cwd.c_str()) != 0) _exit(127);
    }
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(out_pipe[1]);
  close(err_pipe[1]);

  auto deadline = start + std::chrono::duration_cast<clock::duration>(
                              std::chrono::duration<double>(timeout_seconds));
  struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  bool open_fd[2] = {true, true};
  char buf[4096];
  while (open_fd[0] || open_fd[1]) {
    auto now = clock::now();
    if (now >= deadline) {
      kill(-pid, SIGKILL);
      result.timed_out = true;
      break;
    }
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    fds[0].fd = open_fd[0] ? out_pipe[0] : -1;
    fds[1].fd = open_fd[1] ? err_pipe[0] : -1;
    int rc = poll(fds, 2, wait_ms > 0 ? wait_ms : 1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;  // loop re-checks the deadline
    for (int i = 0; i < 2; ++i) {
      if (!open_fd[i] || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
      ssize_t got = read(fds[i].fd, buf, sizeof buf);
      if (got > 0) {
        (i == 0 ? result.stdout_text : result.stderr_text).append(buf, got);
      } else {
        open_fd[i] = false;
      }
    }
  }
  close(out_pipe[0]);
  close(err_pipe[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (result.timed_out) {
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }
  result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           clock::now() - start)
                           .count();
  return result;
}

namespace detail {

inline std::string substitute_placeholders(std::string templ, const Workspace& ws,
                                           const BugInstance& bug) {
  auto replace_all = [](std::string& s, std::string_view from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  std::filesystem::path file = ws.root / bug.target_file;
  replace_all(templ, "{workspace}", ws.root.string());
  replace_all(templ, "{file}", file.string());
  replace_all(templ, "{classname}", file.stem().string());
  return templ;
}

inline std::filesystem::path unique_workspace_root(const std::filesystem::path& base,
                                                   const std::string& bug_id) {
  static std::atomic<std::uint64_t> counter{0};
  std::string dir = bug_id;
  for (char& c : dir) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  dir += "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  return base / dir;
}

}  // namespace detail

// Copies the bug's template into a private directory and splices the
// candidate over the target span. Refuses if the template drifted from the
// manifest since validation.
inline Workspace inject_patch(const BugInstance& bug, const std::string& code,
                              const std::filesystem::path& scratch_base =
                                  std::filesystem::temp_directory_path() / "rtt-ws",
                              const std::string& position = "") {
  namespace fs = std::filesystem;
  Workspace ws;
  ws.bug_id = bug.id;
  ws.candidate_position = position;
  ws.root = detail::unique_workspace_root(scratch_base, bug.id);
  std::error_code ec;
  fs::create_directories(ws.root, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create workspace " + ws.root.string());
  fs::copy(bug.workspace_template, ws.root,
           fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
  if (ec) {
    throw Error(ErrorKind::io, "cannot copy template " + bug.workspace_template + ": " +
                                   ec.message());
  }
  fs::path target = ws.root / bug.target_file;
  std::string content = detail::read_file(target);
  if (bug.target_span.end > content.size() ||
      content.substr(bug.target_span.start,
                     bug.target_span.end - bug.target_span.start) != bug.buggy_code) {
    throw Error(ErrorKind::span_mismatch,
                "template bytes at span no longer match buggy_code for " + bug.id);
  }
  content.replace(bug.target_span.start, bug.target_span.end - bug.target_span.start,
                  code);
  detail::write_file(target, content);
  return ws;
}

inline void cleanup_workspace(const Workspace& ws) {
  std::error_code ec;
  std::filesystem::remove_all(ws.root, ec);
}

inline CompileOutcome compile_candidate(const Workspace& ws, const BugInstance& bug) {
  const TestSpec& spec = bug.test_spec;
  CompileOutcome outcome;
  auto start = std::chrono::steady_clock::now();
  if (spec.kind == TestKind::minilang) {
    std::string program = detail::read_file(ws.root / bug.target_file);
    MinilangResult parsed = minilang_parse(program);
    outcome.compilable = parsed.status == MinilangStatus::ok ? 1 : 0;
    outcome.log = parsed.message;
  } else if (spec.compile_command) {
    CommandResult res =
        run_command(detail::substitute_placeholders(*spec.compile_command, ws, bug),
                    ws.root, spec.timeout_seconds);
    outcome.compilable = (!res.timed_out && res.exit_code == 0) ? 1 : 0;
    outcome.log = res.stdout_text + res.stderr_text;
    if (res.timed_out) outcome.log += "\n[compile timed out]";
  } else {
    outcome.compilable = 1;  // command kind with no compile step
  }
  outcome.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return outcome;
}

// Runs every test case under its own timeout. Minilang programs execute
// in-process against a deadline; command tests pass iff they exit 0.
// Per-test output also lands in {workspace}/test_logs/.
inline TestOutcome run_tests(const Workspace& ws, const BugInstance& bug) {
  namespace fs = std::filesystem;
  const TestSpec& spec = bug.test_spec;
  TestOutcome outcome;
  outcome.total = static_cast<int>(spec.test_cases.size());

  std::string patched;
  if (spec.kind == TestKind::minilang) {
    patched = detail::read_file(ws.root / bug.target_file);
  }
  fs::path log_dir = ws.root / "test_logs";
  std::error_code ec;
  fs::create_directories(log_dir, ec);

  for (const auto& tc : spec.test_cases) {
    PerTestOutcome per;
    per.name = tc.name;
    try {
      if (spec.kind == TestKind::minilang) {
        std::string program = patched;
        if (tc.program) {
          program += '\n';
          program += *tc.program;
        }
        MinilangLimits limits;
        limits.deadline = std::chrono::steady_clock::now() +
                          std::chrono::seconds(spec.timeout_seconds);
        // the wall-clock deadline governs; the step ceiling is a far backstop
        limits.max_steps = 4'000'000'000LL;
        MinilangResult res = minilang_run(program, tc.stdin_text, limits);
        if (res.status == MinilangStatus::ok) {
          per.passed = res.output == *tc.expected_output;
          if (!per.passed) {
            per.log = "expected [" + *tc.expected_output + "] got [" + res.output + "]";
          }
        } else if (res.status == MinilangStatus::timeout) {
          per.passed = false;
          per.log = "timed out";
          outcome.timed_out = true;
        } else {
          per.passed = false;
          per.log = res.message;
        }
        detail::write_file(log_dir / (tc.name + ".out"),
                           res.status == MinilangStatus::ok ? res.output : res.message);
      } else {
        CommandResult res =
            run_command(detail::substitute_placeholders(*tc.command, ws, bug), ws.root,
                        spec.timeout_seconds);
        per.passed = !res.timed_out && res.exit_code == 0;
        per.log = res.stdout_text + res.stderr_text;
        if (res.timed_out) {
          per.log += "\n[test timed out]";
          outcome.timed_out = true;
        }
        detail::write_file(log_dir / (tc.name + ".out"), res.stdout_text);
        detail::write_file(log_dir / (tc.name + ".err"), res.stderr_text);
      }
    } catch (const std::exception& e) {
      // harness failure counts against the candidate but never aborts the sweep
      per.passed = false;
      per.log = std::string("harness error: ") + e.what();
    }
    if (per.passed) ++outcome.passed;
    outcome.per_test.push_back(std::move(per));
  }
  return outcome;
}

struct OracleViolation {
  std::string bug_id;
  std::string kind;  // fix-not-compilable | fix-fails-tests | vacuous | harness-error
  std::string detail;
};

struct OracleReport {
  std::vector<OracleViolation> violations;
  int bugs_checked = 0;
};

// Fixture contract check: every ground-truth fix must compile and pass all
// tests, and every buggy version must fail at least one.
inline OracleReport validate_against_oracle(
    const BenchmarkManifest& manifest,
    const std::filesystem::path& scratch_base =
        std::filesystem::temp_directory_path() / "rtt-oracle") {
  OracleReport report;
  for (const auto& bug : manifest.bugs) {
    ++report.bugs_checked;
    try {
      if (bug.ground_truth_fix) {
        Workspace ws = inject_patch(bug, *bug.ground_truth_fix, scratch_base, "oracle");
        CompileOutcome comp = compile_candidate(ws, bug);
        if (!comp.compilable) {
          report.violations.push_back({bug.id, "fix-not-compilable", comp.log});
        } else {
          TestOutcome tests = run_tests(ws, bug);
          if (tests.passed != tests.total) {
            std::string failing;
            for (const auto& t : tests.per_test) {
              if (!t.passed) failing += (failing.empty() ? "" : ", ") + t.name;
            }
            report.violations.push_back({bug.id, "fix-fails-tests", failing});
          }
        }
        cleanup_workspace(ws);
      }
      Workspace ws = inject_patch(bug, bug.buggy_code, scratch_base, "oracle");
      CompileOutcome comp = compile_candidate(ws, bug);
      if (comp.compilable) {
        TestOutcome tests = run_tests(ws, bug);
        if (tests.passed == tests.total) {
          report.violations.push_back(
              {bug.id, "vacuous", "buggy version already passes all tests"});
        }
      }
      cleanup_workspace(ws);
    } catch (const std::exception& e) {
      report.violations.push_back({bug.id, "harness-error", e.what()});
    }
  }
  return report;
}

}  // namespace rtt
