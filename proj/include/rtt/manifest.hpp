#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtt/error.hpp"

namespace rtt {

struct TestCase {
  std::string name;
  std::optional<std::string> command;          // command kind
  std::optional<std::string> program;          // minilang driver appended to the patched file
  std::string stdin_text;                      // minilang input channel
  std::optional<std::string> expected_output;  // minilang byte-exact expectation
};

enum class TestKind { command, minilang };

struct TestSpec {
  TestKind kind = TestKind::minilang;
  std::optional<std::string> compile_command;
  std::vector<TestCase> test_cases;
  int timeout_seconds = 30;
};

struct ByteSpan {
  std::uint64_t start = 0;
  std::uint64_t end = 0;  // half-open
};

struct BugInstance {
  std::string id;
  std::string buggy_code;
  std::string function_signature;
  std::optional<std::string> ground_truth_fix;
  std::string workspace_template;  // directory, resolved against the manifest location
  std::string target_file;         // relative to the workspace root
  ByteSpan target_span;
  TestSpec test_spec;
  std::vector<std::string> tags;
};

struct BenchmarkManifest {
  std::string benchmark_id;
  std::string language;
  std::string version;
  std::vector<BugInstance> bugs;
};

struct ManifestViolation {
  std::string bug_id;  // empty for manifest-level problems
  std::string field;
  std::string message;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << data;
}

}  // namespace detail

// Checks every manifest invariant, filesystem-backed ones included, and
// reports all failures instead of stopping at the first.
inline std::vector<ManifestViolation> validate_manifest(const BenchmarkManifest& m) {
  namespace fs = std::filesystem;
  std::vector<ManifestViolation> out;
  if (m.bugs.empty()) {
    out.push_back({"", "bugs", "manifest has no bugs"});
  }
  std::set<std::string> seen;
  for (const auto& bug : m.bugs) {
    if (!seen.insert(bug.id).second) {
      out.push_back({bug.id, "id", "duplicate bug id '" + bug.id + "'"});
    }
    if (bug.buggy_code.empty()) {
      out.push_back({bug.id, "buggy_code", "buggy_code is empty"});
    }
    if (bug.buggy_code.find(bug.function_signature) == std::string::npos) {
      out.push_back({bug.id, "function_signature",
                     "signature is not a substring of buggy_code"});
    }
    if (bug.target_span.start >= bug.target_span.end) {
      out.push_back({bug.id, "target_span", "span start must precede end"});
    }
    if (bug.test_spec.test_cases.empty()) {
      out.push_back({bug.id, "test_cases", "test_cases is empty"});
    }
    if (bug.test_spec.timeout_seconds <= 0) {
      out.push_back({bug.id, "timeout_seconds", "timeout must be positive"});
    }
    for (const auto& tc : bug.test_spec.test_cases) {
      if (bug.test_spec.kind == TestKind::command && !tc.command) {
        out.push_back({bug.id, "test_cases",
                       "test '" + tc.name + "' lacks a command"});
      }
      if (bug.test_spec.kind == TestKind::minilang && !tc.expected_output) {
        out.push_back({bug.id, "test_cases",
                       "test '" + tc.name + "' lacks expected_output"});
      }
    }
    fs::path file = fs::path(bug.workspace_template) / bug.target_file;
    std::error_code ec;
    if (!fs::exists(file, ec)) {
      out.push_back({bug.id, "target_file", "missing " + file.string()});
      continue;
    }
    std::string content = detail::read_file(file);
    if (bug.target_span.end > content.size()) {
      out.push_back({bug.id, "target_span",
                     "span [" + std::to_string(bug.target_span.start) + "," +
                         std::to_string(bug.target_span.end) + ") exceeds file size " +
                         std::to_string(content.size())});
      continue;
    }
    if (bug.target_span.start < bug.target_span.end &&
        content.substr(bug.target_span.start,
                       bug.target_span.end - bug.target_span.start) != bug.buggy_code) {
      out.push_back({bug.id, "target_span",
                     "template bytes at span do not equal buggy_code"});
    }
  }
  return out;
}

namespace detail {

inline TestSpec test_spec_from_json(const nlohmann::json& j) {
  TestSpec spec;
  std::string kind = j.value("kind", "minilang");
  if (kind == "command") {
    spec.kind = TestKind::command;
  } else if (kind == "minilang") {
    spec.kind = TestKind::minilang;
  } else {
    throw Error(ErrorKind::parse, "unknown test spec kind '" + kind + "'");
  }
  if (j.contains("compile_command")) {
    spec.compile_command = j.at("compile_command").get<std::string>();
  }
  spec.timeout_seconds = j.value("timeout_seconds", 30);
  for (const auto& tj : j.value("test_cases", nlohmann::json::array())) {
    TestCase tc;
    tc.name = tj.value("name", "");
    if (tj.contains("command")) tc.command = tj.at("command").get<std::string>();
    if (tj.contains("program")) tc.program = tj.at("program").get<std::string>();
    tc.stdin_text = tj.value("stdin", "");
    if (tj.contains("expected_output")) {
      tc.expected_output = tj.at("expected_output").get<std::string>();
    }
    spec.test_cases.push_back(std::move(tc));
  }
  return spec;
}

inline nlohmann::json test_spec_to_json(const TestSpec& spec) {
  nlohmann::json j;
  j["kind"] = spec.kind == TestKind::command ? "command" : "minilang";
  if (spec.compile_command) j["compile_command"] = *spec.compile_command;
  j["timeout_seconds"] = spec.timeout_seconds;
  j["test_cases"] = nlohmann::json::array();
  for (const auto& tc : spec.test_cases) {
    nlohmann::json tj;
    tj["name"] = tc.name;
    if (tc.command) tj["command"] = *tc.command;
    if (tc.program) tj["program"] = *tc.program;
    if (!tc.stdin_text.empty()) tj["stdin"] = tc.stdin_text;
    if (tc.expected_output) tj["expected_output"] = *tc.expected_output;
    j["test_cases"].push_back(std::move(tj));
  }
  return j;
}

}  // namespace detail

// Parses a manifest without validating. Relative workspace paths are
// resolved against the manifest's directory.
inline BenchmarkManifest parse_manifest(const std::string& text,
                                        const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("manifest parse error: ") + e.what());
  }
  BenchmarkManifest m;
  try {
    m.benchmark_id = j.at("benchmark_id").get<std::string>();
    m.language = j.value("language", "");
    m.version = j.value("version", "");
    for (const auto& bj : j.at("bugs")) {
      BugInstance bug;
      bug.id = bj.at("id").get<std::string>();
      bug.buggy_code = bj.at("buggy_code").get<std::string>();
      bug.function_signature = bj.at("function_signature").get<std::string>();
      if (bj.contains("ground_truth_fix")) {
        bug.ground_truth_fix = bj.at("ground_truth_fix").get<std::string>();
      }
      std::filesystem::path tmpl = bj.at("workspace_template").get<std::string>();
      if (tmpl.is_relative()) tmpl = base_dir / tmpl;
      bug.workspace_template = tmpl.lexically_normal().string();
      bug.target_file = bj.at("target_file").get<std::string>();
      const auto& span = bj.at("target_span");
      bug.target_span.start = span.at(0).get<std::uint64_t>();
      bug.target_span.end = span.at(1).get<std::uint64_t>();
      bug.test_spec = detail::test_spec_from_json(bj.at("test_spec"));
      for (const auto& t : bj.value("tags", nlohmann::json::array())) {
        bug.tags.push_back(t.get<std::string>());
      }
      m.bugs.push_back(std::move(bug));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("manifest field error: ") + e.what());
  }
  return m;
}

// Loads and fully validates; the error message names every failing bug.
inline BenchmarkManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::io, "manifest not found: " + path.string());
  }
  BenchmarkManifest m =
      parse_manifest(detail::read_file(path), path.parent_path());
  auto violations = validate_manifest(m);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "manifest invariant violations (" << violations.size() << "):";
    for (const auto& v : violations) {
      msg << "\n  [" << (v.bug_id.empty() ? "-" : v.bug_id) << "] " << v.field << ": "
          << v.message;
    }
    throw Error(ErrorKind::invariant, msg.str());
  }
  return m;
}

inline nlohmann::json manifest_to_json(const BenchmarkManifest& m) {
  nlohmann::json j;
  j["benchmark_id"] = m.benchmark_id;
  j["language"] = m.language;
  j["version"] = m.version;
  j["bugs"] = nlohmann::json::array();
  for (const auto& bug : m.bugs) {
    nlohmann::json bj;
    bj["id"] = bug.id;
    bj["buggy_code"] = bug.buggy_code;
    bj["function_signature"] = bug.function_signature;
    if (bug.ground_truth_fix) bj["ground_truth_fix"] = *bug.ground_truth_fix;
    bj["workspace_template"] = bug.workspace_template;
    bj["target_file"] = bug.target_file;
    bj["target_span"] = {bug.target_span.start, bug.target_span.end};
    bj["test_spec"] = detail::test_spec_to_json(bug.test_spec);
    if (!bug.tags.empty()) bj["tags"] = bug.tags;
    j["bugs"].push_back(std::move(bj));
  }
  return j;
}

inline void save_manifest(const BenchmarkManifest& m, const std::filesystem::path& path) {
  detail::write_file(path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace rtt
