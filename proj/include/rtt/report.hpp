#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtt/error.hpp"
#include "rtt/manifest.hpp"
#include "rtt/records.hpp"

namespace rtt {

struct PositionCell {
  long long generated = 0;
  long long compilable = 0;
  long long plausible = 0;
};

using PositionMatrix = std::array<std::array<PositionCell, 5>, 5>;

struct AggregateReport {
  std::string benchmark_id;
  std::string model_name;
  std::string intermediate;
  std::vector<std::uint64_t> seeds;
  std::vector<int> per_run_plausible_counts;
  double avg = 0.0;
  double std_dev = 0.0;  // population standard deviation over runs
  std::set<std::string> any_run;
  std::set<std::string> every_run;
  double compilable_pct = 0.0;
  PositionMatrix position_matrix{};
  std::vector<double> pass_rate_bands;   // percentages over the banded population
  std::vector<long long> codebleu_hist;  // counts per 10-point bin on [0,100]
  bool codebleu_hist_present = false;
  long long total_generated = 0;  // non-skipped records
  long long total_skipped = 0;
  // Fig-4-style banding includes non-compilable candidates at rate 0; the
  // flag travels with exports so readers know the population choice.
  bool bands_include_non_compilable = true;
};

// "2.0 ± 0.0" with one decimal on both numbers.
inline std::string format_avg_std(double avg, double std_dev) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f ± %.1f", avg, std_dev);
  return buf;
}

inline PositionMatrix position_distribution(const std::vector<SeedRun>& runs) {
  PositionMatrix matrix{};
  for (const auto& run : runs) {
    for (const auto& record : run.records) {
      if (record.skipped) continue;
      if (record.intermediate_index < 0 || record.intermediate_index >= 5 ||
          record.sample_index < 1 || record.sample_index > 5) {
        continue;
      }
      auto& cell = matrix[record.intermediate_index][record.sample_index - 1];
      ++cell.generated;
      if (record.evaluation) {
        if (record.evaluation->compilable) ++cell.compilable;
        if (record.evaluation->plausible) ++cell.plausible;
      }
    }
  }
  return matrix;
}

// Non-plausible candidates bucketed by test pass rate into [0,10) .. [90,100]
// (the last band is closed). Returns percentages that sum to 100 when the
// population is non-empty.
inline std::vector<double> pass_rate_bands(const std::vector<SeedRun>& runs,
                                           int bins = 10) {
  if (bins < 1) throw Error(ErrorKind::config, "bins must be >= 1");
  std::vector<long long> counts(bins, 0);
  long long population = 0;
  double width = 100.0 / bins;
  for (const auto& run : runs) {
    for (const auto& record : run.records) {
      if (record.skipped || !record.evaluation) continue;
      if (record.evaluation->plausible) continue;
      int idx = std::min(static_cast<int>(record.evaluation->test_pass_rate / width),
                         bins - 1);
      ++counts[idx];
      ++population;
    }
  }
  std::vector<double> pct(bins, 0.0);
  if (population > 0) {
    for (int i = 0; i < bins; ++i) {
      pct[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(population);
    }
  }
  return pct;
}

struct CodeBleuHistogram {
  std::vector<long long> counts;  // one bin per bin_width on [0,100], last closed
  bool present = false;           // false when no record carries a reference metric
};

// Bug-level averages first, then binning, matching how the per-bug score
// distribution is read.
inline CodeBleuHistogram codebleu_histogram(const std::vector<SeedRun>& runs,
                                            int bin_width = 10) {
  if (bin_width < 1 || bin_width > 100) {
    throw Error(ErrorKind::config, "bin_width must be in [1,100]");
  }
  int bins = (100 + bin_width - 1) / bin_width;
  CodeBleuHistogram hist;
  hist.counts.assign(bins, 0);
  std::map<std::string, std::pair<double, long long>> per_bug;  // sum, count
  for (const auto& run : runs) {
    for (const auto& record : run.records) {
      if (record.skipped || !record.evaluation || !record.evaluation->codebleu) continue;
      auto& acc = per_bug[record.bug_id];
      acc.first += *record.evaluation->codebleu;
      acc.second += 1;
    }
  }
  if (per_bug.empty()) return hist;
  hist.present = true;
  for (const auto& [bug_id, acc] : per_bug) {
    double scaled = 100.0 * acc.first / static_cast<double>(acc.second);
    int idx = std::min(static_cast<int>(scaled / bin_width), bins - 1);
    ++hist.counts[idx];
  }
  return hist;
}

// Sample Pearson correlation coefficient.
inline double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error(ErrorKind::config, "pearson_r needs two equally sized series, n >= 2");
  }
  double n = static_cast<double>(xs.size());
  double mean_x = 0, mean_y = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mean_x;
    double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::degenerate_variance, "a series has zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

struct UniqueFixComparison {
  long long previous_total = 0;  // P: repaired in previous work
  long long ours_total = 0;      // O: repaired by this run (any run)
  long long only_ours = 0;       // N: ours \ theirs
};

inline UniqueFixComparison unique_fix_comparison(const std::set<std::string>& ours,
                                                 const std::set<std::string>& theirs) {
  UniqueFixComparison cmp;
  cmp.previous_total = static_cast<long long>(theirs.size());
  cmp.ours_total = static_cast<long long>(ours.size());
  for (const auto& id : ours) {
    if (!theirs.count(id)) ++cmp.only_ours;
  }
  return cmp;
}

// Cross-seed aggregation: per-run plausibility counts, avg ± population std,
// union (Any Run) and intersection (Every Run), compilability percentage,
// position matrix, bands, histogram.
inline AggregateReport aggregate_runs(const std::vector<SeedRun>& runs) {
  if (runs.empty()) throw Error(ErrorKind::config, "no runs to aggregate");
  AggregateReport report;
  bool first_run = true;
  long long compilable = 0;
  for (const auto& run : runs) {
    report.seeds.push_back(run.seed);
    std::set<std::string> repaired;
    for (const auto& record : run.records) {
      if (record.skipped) {
        ++report.total_skipped;
        continue;
      }
      ++report.total_generated;
      if (record.evaluation && record.evaluation->compilable) ++compilable;
      if (record.evaluation && record.evaluation->plausible) {
        repaired.insert(record.bug_id);
      }
    }
    report.per_run_plausible_counts.push_back(static_cast<int>(repaired.size()));
    for (const auto& id : repaired) report.any_run.insert(id);
    if (first_run) {
      report.every_run = repaired;
      first_run = false;
    } else {
      std::set<std::string> kept;
      std::set_intersection(report.every_run.begin(), report.every_run.end(),
                            repaired.begin(), repaired.end(),
                            std::inserter(kept, kept.begin()));
      report.every_run = std::move(kept);
    }
  }
  double sum = 0;
  for (int c : report.per_run_plausible_counts) sum += c;
  report.avg = sum / static_cast<double>(report.per_run_plausible_counts.size());
  double var = 0;
  for (int c : report.per_run_plausible_counts) {
    double d = c - report.avg;
    var += d * d;
  }
  var /= static_cast<double>(report.per_run_plausible_counts.size());
  report.std_dev = std::sqrt(var);
  report.compilable_pct =
      report.total_generated > 0
          ? 100.0 * static_cast<double>(compilable) /
                static_cast<double>(report.total_generated)
          : 0.0;
  report.position_matrix = position_distribution(runs);
  report.pass_rate_bands = pass_rate_bands(runs);
  CodeBleuHistogram hist = codebleu_histogram(runs);
  report.codebleu_hist = hist.counts;
  report.codebleu_hist_present = hist.present;
  return report;
}

// Reads every {seed}/candidates.ndjson under a model run directory, seeds
// sorted numerically. Labels come from manifest.lock when present.
inline std::vector<SeedRun> load_run_records(const std::filesystem::path& model_dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(model_dir)) {
    throw Error(ErrorKind::io, "run directory not found: " + model_dir.string());
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& entry : fs::directory_iterator(model_dir)) {
    if (!entry.is_directory()) continue;
    std::string name = entry.path().filename().string();
    if (name.empty() || name[0] == '.') continue;
    if (!std::all_of(name.begin(), name.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    if (fs::exists(entry.path() / "candidates.ndjson")) {
      seeds.push_back(std::stoull(name));
    }
  }
  std::sort(seeds.begin(), seeds.end());
  if (seeds.empty()) {
    throw Error(ErrorKind::io, "no seed runs under " + model_dir.string());
  }
  std::vector<SeedRun> runs;
  for (std::uint64_t seed : seeds) {
    SeedRun run;
    run.seed = seed;
    std::ifstream in(model_dir / std::to_string(seed) / "candidates.ndjson",
                     std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      run.records.push_back(candidate_from_json(nlohmann::json::parse(line)));
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

inline void fill_report_labels(AggregateReport& report,
                               const std::filesystem::path& model_dir) {
  namespace fs = std::filesystem;
  fs::path lock = model_dir / "manifest.lock";
  if (fs::exists(lock)) {
    nlohmann::json j = nlohmann::json::parse(detail::read_file(lock));
    report.benchmark_id = j.value("benchmark_id", "");
    report.model_name = j.value("model", "");
    report.intermediate = j.value("intermediate", "");
  }
  if (report.model_name.empty()) report.model_name = model_dir.filename().string();
  if (report.benchmark_id.empty() && model_dir.has_parent_path()) {
    report.benchmark_id = model_dir.parent_path().filename().string();
  }
}

// One file per table or figure-data set, plus a human-readable summary.
// Deterministic: exporting the same report twice is byte-identical.
inline std::vector<std::filesystem::path> export_report(
    const AggregateReport& report, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    fs::path p = out_dir / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
    out << content;
    written.push_back(p);
  };
  char buf[128];

  {
    std::string csv = "benchmark,model,intermediate,runs,avg,std,any_run,every_run,"
                      "compilable_pct\n";
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%zu,%zu,%.2f", report.avg,
                  report.std_dev, report.any_run.size(), report.every_run.size(),
                  report.compilable_pct);
    csv += report.benchmark_id + "," + report.model_name + "," + report.intermediate +
           "," + std::to_string(report.seeds.size()) + "," + buf + "\n";
    emit("summary.csv", csv);
  }
  {
    std::string csv = "seed,plausible_count\n";
    for (std::size_t i = 0; i < report.seeds.size(); ++i) {
      csv += std::to_string(report.seeds[i]) + "," +
             std::to_string(report.per_run_plausible_counts[i]) + "\n";
    }
    emit("per_run.csv", csv);
  }
  {
    std::string csv = "position,generated,compilable,plausible\n";
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const auto& cell = report.position_matrix[i][j];
        csv += position_label(i, j + 1) + "," + std::to_string(cell.generated) + "," +
               std::to_string(cell.compilable) + "," + std::to_string(cell.plausible) +
               "\n";
      }
    }
    emit("position_matrix.csv", csv);
  }
  {
    std::string csv = "band_start,band_end,percentage\n";
    int bins = static_cast<int>(report.pass_rate_bands.size());
    double width = 100.0 / bins;
    for (int i = 0; i < bins; ++i) {
      std::snprintf(buf, sizeof buf, "%.0f,%.0f,%.4f", i * width, (i + 1) * width,
                    report.pass_rate_bands[i]);
      csv += std::string(buf) + "\n";
    }
    emit("pass_rate_bands.csv", csv);
  }
  {
    std::string csv = "bin_start,bin_end,count\n";
    int bins = static_cast<int>(report.codebleu_hist.size());
    if (bins > 0) {
      int width = 100 / bins;
      for (int i = 0; i < bins; ++i) {
        csv += std::to_string(i * width) + "," + std::to_string((i + 1) * width) + "," +
               std::to_string(report.codebleu_hist[i]) + "\n";
      }
    }
    emit("codebleu_histogram.csv", csv);
  }
  {
    std::string ids;
    for (const auto& id : report.any_run) ids += id + "\n";
    emit("any_run.txt", ids);
    ids.clear();
    for (const auto& id : report.every_run) ids += id + "\n";
    emit("every_run.txt", ids);
  }
  {
    nlohmann::json meta;
    meta["bands_include_non_compilable"] = report.bands_include_non_compilable;
    meta["codebleu_histogram_present"] = report.codebleu_hist_present;
    meta["std_dev_kind"] = "population";
    emit("metadata.json", meta.dump(2) + "\n");
  }
  {
    std::string txt;
    txt += "benchmark:            " + report.benchmark_id + "\n";
    txt += "model:                " + report.model_name + "\n";
    txt += "intermediate:         " + report.intermediate + "\n";
    txt += "runs:                 " + std::to_string(report.seeds.size()) + "\n";
    txt += "plausibility rate:    " + format_avg_std(report.avg, report.std_dev) + "\n";
    txt += "any run:              " + std::to_string(report.any_run.size()) + "\n";
    txt += "every run:            " + std::to_string(report.every_run.size()) + "\n";
    std::snprintf(buf, sizeof buf, "%.1f%%", report.compilable_pct);
    txt += "compilable:           " + std::string(buf) + "\n";
    txt += "records:              " + std::to_string(report.total_generated) +
           " generated, " + std::to_string(report.total_skipped) + " skipped\n";
    emit("summary.txt", txt);
  }
  return written;
}

}  // namespace rtt
