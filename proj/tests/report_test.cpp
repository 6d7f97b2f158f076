#include "rtt/report.hpp"

#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

using rtt::aggregate_runs;
using rtt::AggregateReport;
using rtt::CandidatePatch;
using rtt::pearson_r;
using rtt::SeedRun;
using rtt::unique_fix_comparison;

namespace {

CandidatePatch record(const std::string& bug, std::uint64_t seed, int inter, int sample,
                      int compilable, int plausible, double rate) {
  CandidatePatch c;
  c.bug_id = bug;
  c.run_seed = seed;
  c.intermediate_index = inter;
  c.sample_index = sample;
  c.extracted_code = "code";
  rtt::CandidateEvaluation eval;
  eval.compilable = compilable;
  eval.plausible = plausible;
  eval.test_pass_rate = rate;
  c.evaluation = eval;
  return c;
}

SeedRun run_with(std::uint64_t seed, const std::vector<std::string>& plausible_bugs,
                 const std::vector<std::string>& failing_bugs) {
  SeedRun run;
  run.seed = seed;
  for (const auto& b : plausible_bugs) run.records.push_back(record(b, seed, 0, 1, 1, 1, 100));
  for (const auto& b : failing_bugs) run.records.push_back(record(b, seed, 0, 1, 1, 0, 40));
  return run;
}

TEST(Aggregate, ConstantTenRunsMatchTableShape) {
  std::vector<SeedRun> runs;
  for (int s = 0; s < 10; ++s) runs.push_back(run_with(s, {"b1", "b2"}, {"b3"}));
  AggregateReport report = aggregate_runs(runs);
  EXPECT_DOUBLE_EQ(report.avg, 2.0);
  EXPECT_DOUBLE_EQ(report.std_dev, 0.0);
  EXPECT_EQ(report.any_run.size(), 2u);
  EXPECT_EQ(report.every_run.size(), 2u);
  EXPECT_EQ(rtt::format_avg_std(report.avg, report.std_dev), "2.0 ± 0.0");
}

TEST(Aggregate, UnionAndIntersectionOfDisjointRuns) {
  std::vector<SeedRun> runs = {run_with(0, {"b1"}, {"b2"}), run_with(1, {"b2"}, {"b1"})};
  AggregateReport report = aggregate_runs(runs);
  EXPECT_DOUBLE_EQ(report.avg, 1.0);
  EXPECT_DOUBLE_EQ(report.std_dev, 0.0);
  EXPECT_EQ(report.any_run, (std::set<std::string>{"b1", "b2"}));
  EXPECT_TRUE(report.every_run.empty());
}

TEST(Aggregate, SingleRunHasAnyEqualsEvery) {
  std::vector<SeedRun> runs = {run_with(4, {"b1", "b7"}, {})};
  AggregateReport report = aggregate_runs(runs);
  EXPECT_DOUBLE_EQ(report.avg, 2.0);
  EXPECT_DOUBLE_EQ(report.std_dev, 0.0);
  EXPECT_EQ(report.any_run, report.every_run);
}

TEST(Aggregate, EmptyInputThrows) {
  EXPECT_THROW(aggregate_runs({}), rtt::Error);
}

TEST(Aggregate, SetSandwichHoldsOnRandomInputs) {
  std::mt19937 rng(3);
  const std::vector<std::string> bugs = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SeedRun> runs;
    int n_runs = 1 + rng() % 6;
    for (int s = 0; s < n_runs; ++s) {
      std::vector<std::string> plausible, failing;
      for (const auto& b : bugs) {
        (rng() % 2 ? plausible : failing).push_back(b);
      }
      runs.push_back(run_with(s, plausible, failing));
    }
    AggregateReport report = aggregate_runs(runs);
    int min_count = *std::min_element(report.per_run_plausible_counts.begin(),
                                      report.per_run_plausible_counts.end());
    int max_count = *std::max_element(report.per_run_plausible_counts.begin(),
                                      report.per_run_plausible_counts.end());
    EXPECT_LE(report.every_run.size(), static_cast<std::size_t>(min_count));
    EXPECT_LE(min_count, report.avg);
    EXPECT_LE(report.avg, max_count);
    EXPECT_LE(static_cast<std::size_t>(max_count), report.any_run.size());
    for (const auto& id : report.every_run) EXPECT_TRUE(report.any_run.count(id));
  }
}

TEST(PositionMatrix, CountsConservedAndPlacedCorrectly) {
  SeedRun run;
  run.seed = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 1; j <= 5; ++j) {
      run.records.push_back(record("b", 0, i, j, j % 2, 0, 0));
    }
  }
  CandidatePatch skip;
  skip.bug_id = "oversized";
  skip.skipped = true;
  skip.sample_index = 0;
  run.records.push_back(skip);

  auto matrix = rtt::position_distribution({run});
  long long generated = 0, compilable = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      EXPECT_EQ(matrix[i][j].generated, 1);
      generated += matrix[i][j].generated;
      compilable += matrix[i][j].compilable;
    }
  }
  EXPECT_EQ(generated, 25);  // skipped record does not count
  EXPECT_EQ(compilable, 15); // samples 1,3,5 per intermediate
}

TEST(PositionMatrix, FirstSampleDominanceShowsUpAsColumnOne) {
  // a backend whose first backward sample is the only compilable one
  SeedRun run;
  run.seed = 0;
  for (const char* bug : {"b1", "b2", "b3"}) {
    for (int i = 0; i < 5; ++i) {
      for (int j = 1; j <= 5; ++j) {
        run.records.push_back(record(bug, 0, i, j, j == 1 ? 1 : 0, 0, 0));
      }
    }
  }
  auto matrix = rtt::position_distribution({run});
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(matrix[i][0].compilable, 3);
    for (int j = 1; j < 5; ++j) EXPECT_EQ(matrix[i][j].compilable, 0);
  }
}

TEST(PositionMatrix, AllCompilableMirrorsGenerated) {
  SeedRun run;
  run.seed = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 1; j <= 5; ++j) run.records.push_back(record("b", 0, i, j, 1, 0, 50));
  }
  auto matrix = rtt::position_distribution({run});
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      EXPECT_EQ(matrix[i][j].compilable, matrix[i][j].generated);
    }
  }
}

TEST(PassRateBands, PartitionsNonPlausiblePopulation) {
  SeedRun run;
  run.seed = 0;
  run.records.push_back(record("b1", 0, 0, 1, 1, 0, 0.0));    // band 1
  run.records.push_back(record("b2", 0, 0, 2, 1, 0, 5.0));    // band 1
  run.records.push_back(record("b3", 0, 0, 3, 1, 0, 15.0));   // band 2
  run.records.push_back(record("b4", 0, 0, 4, 1, 0, 99.9));   // band 10
  run.records.push_back(record("b5", 0, 0, 5, 1, 1, 100.0));  // plausible: excluded
  auto bands = rtt::pass_rate_bands({run});
  ASSERT_EQ(bands.size(), 10u);
  EXPECT_DOUBLE_EQ(bands[0], 50.0);
  EXPECT_DOUBLE_EQ(bands[1], 25.0);
  EXPECT_DOUBLE_EQ(bands[9], 25.0);
  double sum = 0;
  for (double b : bands) sum += b;
  EXPECT_NEAR(sum, 100.0, 0.01);
}

TEST(PassRateBands, AllZeroRatesLandInFirstBand) {
  SeedRun run;
  run.seed = 0;
  for (int i = 0; i < 4; ++i) run.records.push_back(record("b", 0, 0, i + 1, 0, 0, 0));
  auto bands = rtt::pass_rate_bands({run});
  EXPECT_DOUBLE_EQ(bands[0], 100.0);
}

TEST(CodeBleuHistogram, BugLevelAveragesBinned) {
  SeedRun run;
  run.seed = 0;
  auto with_cb = [](const std::string& bug, int sample, double cb) {
    CandidatePatch c = record(bug, 0, 0, sample, 1, 0, 0);
    c.evaluation->codebleu = cb;
    return c;
  };
  // bug x averages to 0.5 -> bin [50,60); bug y averages 0.95 -> last bin
  run.records.push_back(with_cb("x", 1, 0.4));
  run.records.push_back(with_cb("x", 2, 0.6));
  run.records.push_back(with_cb("y", 1, 0.95));
  auto hist = rtt::codebleu_histogram({run});
  EXPECT_TRUE(hist.present);
  long long total = 0;
  for (auto c : hist.counts) total += c;
  EXPECT_EQ(total, 2);
  EXPECT_EQ(hist.counts[5], 1);
  EXPECT_EQ(hist.counts[9], 1);
}

TEST(CodeBleuHistogram, MissingReferencesFlagged) {
  SeedRun run;
  run.seed = 0;
  run.records.push_back(record("b", 0, 0, 1, 1, 0, 0));  // no codebleu value
  auto hist = rtt::codebleu_histogram({run});
  EXPECT_FALSE(hist.present);
  for (auto c : hist.counts) EXPECT_EQ(c, 0);
}

TEST(Pearson, CollinearAndHandValues) {
  EXPECT_NEAR(pearson_r({1, 2, 3}, {2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(pearson_r({1, 2, 3}, {3, 2, 1}), -1.0, 1e-12);
  // exact covariance/sigma arithmetic for (1,2,3,4) vs (1,3,2,5):
  // cov = 5.5, sxx = 5, syy = 8.75 -> r = 5.5 / sqrt(43.75)
  EXPECT_NEAR(pearson_r({1, 2, 3, 4}, {1, 3, 2, 5}), 5.5 / std::sqrt(43.75), 1e-12);
  EXPECT_NEAR(pearson_r({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-12);
}

TEST(Pearson, AffinePropertyOverRandomSeries) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs;
    for (int i = 0; i < 5 + static_cast<int>(rng() % 10); ++i) {
      xs.push_back(static_cast<double>(rng() % 1000) / 10.0);
    }
    // ensure nonzero variance
    xs[0] += 1000.0;
    double a = (rng() % 2 ? 1 : -1) * (1.0 + static_cast<double>(rng() % 5));
    double b = static_cast<double>(rng() % 100);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(a * x + b);
    EXPECT_NEAR(pearson_r(xs, ys), a > 0 ? 1.0 : -1.0, 1e-9);
  }
}

TEST(Pearson, DegenerateVarianceThrows) {
  try {
    pearson_r({1, 1, 1}, {2, 3, 4});
    FAIL();
  } catch (const rtt::Error& e) {
    EXPECT_EQ(e.kind(), rtt::ErrorKind::degenerate_variance);
  }
  EXPECT_THROW(pearson_r({1}, {2}), rtt::Error);
}

TEST(UniqueFix, TripleSemantics) {
  auto cmp = unique_fix_comparison({"b", "c"}, {"a", "b"});
  EXPECT_EQ(cmp.previous_total, 2);
  EXPECT_EQ(cmp.ours_total, 2);
  EXPECT_EQ(cmp.only_ours, 1);

  auto disjoint = unique_fix_comparison({"x", "y", "z"}, {"a"});
  EXPECT_EQ(disjoint.only_ours, 3);

  auto subset = unique_fix_comparison({"a"}, {"a", "b"});
  EXPECT_EQ(subset.only_ours, 0);
}

TEST(Export, DeterministicAndFormatted) {
  std::vector<SeedRun> runs;
  for (int s = 0; s < 10; ++s) runs.push_back(run_with(s, {"b1", "b2"}, {}));
  AggregateReport report = aggregate_runs(runs);
  report.benchmark_id = "minibench";
  report.model_name = "scripted";
  report.intermediate = "nl:english";

  fs::path dir = fs::temp_directory_path() / "rtt-export-test";
  fs::remove_all(dir);
  auto files = rtt::export_report(report, dir / "a");
  EXPECT_GE(files.size(), 7u);

  std::ifstream summary(dir / "a" / "summary.txt");
  std::string text((std::istreambuf_iterator<char>(summary)),
                   std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("2.0 ± 0.0"), std::string::npos);

  rtt::export_report(report, dir / "b");
  for (const auto& f : files) {
    std::ifstream fa(f, std::ios::binary);
    std::ifstream fb(dir / "b" / f.filename(), std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    EXPECT_EQ(ca, cb) << f.filename();
  }
}

TEST(Export, EmptyAnyRunPrintsZeroNotBlank) {
  std::vector<SeedRun> runs = {run_with(0, {}, {"b1"})};
  AggregateReport report = aggregate_runs(runs);
  fs::path dir = fs::temp_directory_path() / "rtt-export-zero";
  fs::remove_all(dir);
  rtt::export_report(report, dir);
  std::ifstream summary(dir / "summary.txt");
  std::string text((std::istreambuf_iterator<char>(summary)),
                   std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("any run:              0"), std::string::npos);
}

}  // namespace
