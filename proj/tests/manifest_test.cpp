#include "rtt/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const fs::path kMiniBench =
    fs::path(RTT_SOURCE_DIR) / "benchmarks" / "minibench" / "manifest.json";

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("rtt-manifest-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Manifest, MiniBenchLoadsWithEightBugs) {
  rtt::BenchmarkManifest m = rtt::load_manifest(kMiniBench);
  EXPECT_EQ(m.benchmark_id, "minibench");
  EXPECT_EQ(m.language, "minilang");
  ASSERT_EQ(m.bugs.size(), 8u);
  for (const auto& bug : m.bugs) {
    EXPECT_TRUE(bug.ground_truth_fix.has_value());
    EXPECT_NE(bug.buggy_code, *bug.ground_truth_fix);
    EXPECT_NE(bug.buggy_code.find(bug.function_signature), std::string::npos);
  }
}

TEST(Manifest, MissingFileIsIoError) {
  try {
    rtt::load_manifest("/nonexistent/manifest.json");
    FAIL() << "expected an error";
  } catch (const rtt::Error& e) {
    EXPECT_EQ(e.kind(), rtt::ErrorKind::io);
  }
}

TEST(Manifest, DuplicateIdsAreNamedInTheError) {
  rtt::BenchmarkManifest m = rtt::load_manifest(kMiniBench);
  m.bugs.push_back(m.bugs[0]);
  auto violations = rtt::validate_manifest(m);
  ASSERT_FALSE(violations.empty());
  bool found = false;
  for (const auto& v : violations) {
    if (v.field == "id" && v.message.find("off_by_one_sum") != std::string::npos) {
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Manifest, SpanByteMismatchIsReportedPerBug) {
  rtt::BenchmarkManifest m = rtt::load_manifest(kMiniBench);
  m.bugs[2].buggy_code[0] = 'X';  // no longer equals the template bytes
  auto violations = rtt::validate_manifest(m);
  bool span_violation = false;
  for (const auto& v : violations) {
    if (v.bug_id == m.bugs[2].id && v.field == "target_span") span_violation = true;
  }
  EXPECT_TRUE(span_violation);
}

TEST(Manifest, AllViolationsReportedNotJustTheFirst) {
  rtt::BenchmarkManifest m = rtt::load_manifest(kMiniBench);
  m.bugs[0].test_spec.test_cases.clear();
  m.bugs[1].test_spec.timeout_seconds = 0;
  m.bugs[3].function_signature = "not in the code";
  auto violations = rtt::validate_manifest(m);
  EXPECT_GE(violations.size(), 3u);
}

TEST(Manifest, LoadSerializeLoadIsIdentity) {
  rtt::BenchmarkManifest m = rtt::load_manifest(kMiniBench);
  fs::path dir = temp_dir("roundtrip");
  rtt::save_manifest(m, dir / "copy.json");
  rtt::BenchmarkManifest m2 = rtt::load_manifest(dir / "copy.json");
  EXPECT_EQ(m2.benchmark_id, m.benchmark_id);
  EXPECT_EQ(m2.language, m.language);
  EXPECT_EQ(m2.version, m.version);
  ASSERT_EQ(m2.bugs.size(), m.bugs.size());
  for (std::size_t i = 0; i < m.bugs.size(); ++i) {
    EXPECT_EQ(m2.bugs[i].id, m.bugs[i].id);
    EXPECT_EQ(m2.bugs[i].buggy_code, m.bugs[i].buggy_code);
    EXPECT_EQ(m2.bugs[i].function_signature, m.bugs[i].function_signature);
    EXPECT_EQ(m2.bugs[i].ground_truth_fix, m.bugs[i].ground_truth_fix);
    EXPECT_EQ(m2.bugs[i].workspace_template, m.bugs[i].workspace_template);
    EXPECT_EQ(m2.bugs[i].target_file, m.bugs[i].target_file);
    EXPECT_EQ(m2.bugs[i].target_span.start, m.bugs[i].target_span.start);
    EXPECT_EQ(m2.bugs[i].target_span.end, m.bugs[i].target_span.end);
    EXPECT_EQ(m2.bugs[i].tags, m.bugs[i].tags);
    EXPECT_EQ(m2.bugs[i].test_spec.timeout_seconds, m.bugs[i].test_spec.timeout_seconds);
    ASSERT_EQ(m2.bugs[i].test_spec.test_cases.size(),
              m.bugs[i].test_spec.test_cases.size());
    for (std::size_t t = 0; t < m.bugs[i].test_spec.test_cases.size(); ++t) {
      EXPECT_EQ(m2.bugs[i].test_spec.test_cases[t].name,
                m.bugs[i].test_spec.test_cases[t].name);
      EXPECT_EQ(m2.bugs[i].test_spec.test_cases[t].stdin_text,
                m.bugs[i].test_spec.test_cases[t].stdin_text);
      EXPECT_EQ(m2.bugs[i].test_spec.test_cases[t].expected_output,
                m.bugs[i].test_spec.test_cases[t].expected_output);
    }
  }
}

TEST(Manifest, ParseErrorOnBadJson) {
  fs::path dir = temp_dir("badjson");
  std::ofstream(dir / "bad.json") << "{ not json";
  try {
    rtt::load_manifest(dir / "bad.json");
    FAIL() << "expected parse error";
  } catch (const rtt::Error& e) {
    EXPECT_EQ(e.kind(), rtt::ErrorKind::parse);
  }
}

}  // namespace
