// Command-line driver for the round-trip translation repair pipeline.
//
// Subcommands: validate, run, report, compare, metrics.
// Exit codes: 0 ok, 1 domain failure, 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtt/config.hpp"
#include "rtt/error.hpp"
#include "rtt/harness.hpp"
#include "rtt/manifest.hpp"
#include "rtt/metrics.hpp"
#include "rtt/pipeline.hpp"
#include "rtt/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::set<std::string> read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw rtt::Error(rtt::ErrorKind::io, "cannot open id list " + path.string());
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.insert(line);
  }
  return ids;
}

int cmd_validate(const std::string& manifest_path) {
  rtt::BenchmarkManifest manifest;
  try {
    manifest = rtt::load_manifest(manifest_path);
  } catch (const rtt::Error& e) {
    if (e.kind() == rtt::ErrorKind::io || e.kind() == rtt::ErrorKind::parse) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    std::cerr << e.what() << "\n";
    return kExitDomain;
  }
  std::cout << "manifest ok: " << manifest.bugs.size() << " bugs in '"
            << manifest.benchmark_id << "'\n";
  rtt::OracleReport report = rtt::validate_against_oracle(manifest);
  if (report.violations.empty()) {
    std::cout << "oracle ok: all ground-truth fixes pass, all buggy versions fail\n";
    return kExitOk;
  }
  for (const auto& v : report.violations) {
    std::cout << "violation [" << v.bug_id << "] " << v.kind
              << (v.detail.empty() ? "" : ": " + v.detail) << "\n";
  }
  return kExitDomain;
}

int cmd_run(const std::string& manifest_path, const std::string& profile_path,
            const std::string& intermediate_text, const std::string& seeds_text,
            const std::string& out_dir, int workers, int kf, int kb,
            int keep_failures) {
  rtt::RunConfig config;
  config.manifest = rtt::load_manifest(manifest_path);
  rtt::ProfileConfig profile_config = rtt::load_profile_config(profile_path);
  config.profile = profile_config.profile;
  config.intermediate = rtt::parse_intermediate(intermediate_text);
  config.k_forward = kf;
  config.k_backward = kb;
  config.output_dir = out_dir;
  config.worker_limit = workers;
  config.retain_failed_workspaces = keep_failures;
  if (seeds_text.empty()) {
    config.seeds = rtt::default_seeds(config.profile);
  } else {
    std::stringstream ss(seeds_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) config.seeds.push_back(std::stoull(item));
    }
  }

  std::filesystem::path model_dir =
      config.output_dir / config.manifest.benchmark_id / config.profile.name;
  auto backend = rtt::make_backend(profile_config, model_dir);

  rtt::ResultSet results = rtt::run_experiment(config, *backend);
  std::cout << "runs: " << results.runs.size()
            << ", new backend calls: " << results.new_backend_calls << "\n";
  std::cout << "plausibility before=" << results.gain.before_sum
            << " after=" << results.gain.after_sum
            << " improved=" << (results.gain.improved ? "yes" : "no") << "\n";
  std::cout << "records under " << results.model_dir.string() << "\n";
  return kExitOk;
}

int cmd_report(const std::string& run_dir, const std::string& out_dir) {
  auto runs = rtt::load_run_records(run_dir);
  rtt::AggregateReport report = rtt::aggregate_runs(runs);
  rtt::fill_report_labels(report, run_dir);
  std::filesystem::path target = out_dir.empty()
                                     ? std::filesystem::path(run_dir) / "report"
                                     : std::filesystem::path(out_dir);
  auto files = rtt::export_report(report, target);
  std::cout << "plausibility rate: " << rtt::format_avg_std(report.avg, report.std_dev)
            << " (any run " << report.any_run.size() << ", every run "
            << report.every_run.size() << ")\n";
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  return kExitOk;
}

int cmd_compare(const std::string& ours_path, const std::string& theirs_path) {
  std::set<std::string> ours;
  if (std::filesystem::is_directory(ours_path)) {
    auto runs = rtt::load_run_records(ours_path);
    ours = rtt::aggregate_runs(runs).any_run;
  } else {
    ours = read_id_list(ours_path);
  }
  std::set<std::string> theirs = read_id_list(theirs_path);
  rtt::UniqueFixComparison cmp = rtt::unique_fix_comparison(ours, theirs);
  std::cout << "P/O/N: " << cmp.previous_total << " / " << cmp.ours_total << " / "
            << cmp.only_ours << "\n";
  std::cout << "previous work repaired " << cmp.previous_total << ", this run repaired "
            << cmp.ours_total << ", unique to this run " << cmp.only_ours << "\n";
  return kExitOk;
}

int cmd_metrics(const std::string& candidate_path, const std::string& reference_path,
                const std::string& language, const std::string& manifest_path,
                const std::string& bug_id, bool byte_match) {
  std::string candidate = rtt::detail::read_file(candidate_path);
  std::string reference = rtt::detail::read_file(reference_path);

  rtt::NgramSet shared;
  std::optional<rtt::BugInstance> bug;
  std::string lang = language;
  if (!manifest_path.empty()) {
    rtt::BenchmarkManifest manifest = rtt::load_manifest(manifest_path);
    if (lang.empty()) lang = manifest.language;
    std::vector<std::vector<std::string>> corpus;
    for (const auto& b : manifest.bugs) {
      corpus.push_back(rtt::tokenize_code(b.buggy_code, lang));
    }
    shared = rtt::extract_trivially_shared(corpus, 500);
    if (!bug_id.empty()) {
      for (const auto& b : manifest.bugs) {
        if (b.id == bug_id) bug = b;
      }
      if (!bug) {
        std::cerr << "error: bug '" << bug_id << "' not in manifest\n";
        return kExitUsage;
      }
    }
  }

  auto cand_tokens = rtt::tokenize_code(candidate, lang);
  auto ref_tokens = rtt::tokenize_code(reference, lang);

  if (bug) {
    rtt::Workspace ws = rtt::inject_patch(*bug, candidate);
    rtt::CompileOutcome comp = rtt::compile_candidate(ws, *bug);
    std::optional<rtt::TestOutcome> tests;
    if (comp.compilable) tests = rtt::run_tests(ws, *bug);
    rtt::cleanup_workspace(ws);
    double rate = (comp.compilable && tests && tests->total > 0)
                      ? 100.0 * tests->passed / tests->total
                      : 0.0;
    int plausible =
        (comp.compilable && tests && tests->passed == tests->total) ? 1 : 0;
    std::printf("compilable:     %d\n", comp.compilable);
    std::printf("plausible:      %d\n", plausible);
    std::printf("test_pass_rate: %.2f\n", rate);
  } else {
    std::printf("compilable:     n/a (pass --manifest and --bug to evaluate)\n");
    std::printf("plausible:      n/a\n");
    std::printf("test_pass_rate: n/a\n");
  }

  std::printf("exact_match:    %d\n",
              rtt::exact_match(candidate, reference, byte_match, lang));
  std::printf("bleu:           %.6f\n", rtt::compute_bleu(cand_tokens, ref_tokens));
  rtt::CodeBleuResult cb = rtt::compute_codebleu(candidate, reference, lang);
  std::printf("codebleu:       %.6f\n", cb.score);
  std::printf("  ngram:          %.6f\n", cb.ngram);
  std::printf("  weighted_ngram: %.6f\n", cb.weighted_ngram);
  if (cb.syntax) std::printf("  syntax:         %.6f\n", *cb.syntax);
  if (cb.dataflow) std::printf("  dataflow:       %.6f\n", *cb.dataflow);
  std::printf("crystalbleu:    %.6f\n",
              rtt::compute_crystalbleu(cand_tokens, ref_tokens, shared));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Round-trip translation repair pipeline"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Check a benchmark manifest");
  std::string v_manifest;
  validate->add_option("manifest", v_manifest, "manifest file")->required();

  auto* run = app.add_subcommand("run", "Run the repair pipeline");
  std::string r_manifest, r_profile, r_intermediate = "nl:english", r_seeds, r_out;
  int r_workers = 4, r_kf = 5, r_kb = 5, r_keep = 0;
  run->add_option("--manifest", r_manifest, "manifest file")->required();
  run->add_option("--model-profile", r_profile, "model profile json")->required();
  run->add_option("--intermediate", r_intermediate, "nl:<name> or pl:<name>");
  run->add_option("--seeds", r_seeds, "comma-separated seeds (default per profile)");
  run->add_option("--out", r_out, "output directory")->required();
  run->add_option("--workers", r_workers, "worker pool size");
  run->add_option("--kf", r_kf, "forward translations per bug (1-5)");
  run->add_option("--kb", r_kb, "backward translations per intermediate (1-5)");
  run->add_option("--keep-failures", r_keep, "retain up to N failure workspaces");

  auto* report = app.add_subcommand("report", "Aggregate a finished run");
  std::string rep_dir, rep_out;
  report->add_option("run_dir", rep_dir, "{out}/{benchmark}/{model} directory")
      ->required();
  report->add_option("--out", rep_out, "report output directory");

  auto* compare = app.add_subcommand("compare", "Compare repaired-bug sets");
  std::string c_ours, c_theirs;
  compare->add_option("--ours", c_ours, "run dir or id list file")->required();
  compare->add_option("--theirs", c_theirs, "id list file (one bug id per line)")
      ->required();

  auto* metrics = app.add_subcommand("metrics", "Score one candidate against a reference");
  std::string m_candidate, m_reference, m_language, m_manifest, m_bug;
  bool m_byte = false;
  metrics->add_option("candidate", m_candidate, "candidate file")->required();
  metrics->add_option("reference", m_reference, "reference file")->required();
  metrics->add_option("--language", m_language, "language hint for the lexer");
  metrics->add_option("--manifest", m_manifest, "manifest for corpus + test oracle");
  metrics->add_option("--bug", m_bug, "bug id inside --manifest to test against");
  metrics->add_flag("--byte-match", m_byte, "strict byte equality for exact_match");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(v_manifest);
    if (run->parsed()) {
      return cmd_run(r_manifest, r_profile, r_intermediate, r_seeds, r_out, r_workers,
                     r_kf, r_kb, r_keep);
    }
    if (report->parsed()) return cmd_report(rep_dir, rep_out);
    if (compare->parsed()) return cmd_compare(c_ours, c_theirs);
    if (metrics->parsed()) {
      return cmd_metrics(m_candidate, m_reference, m_language, m_manifest, m_bug, m_byte);
    }
  } catch (const rtt::Error& e) {
    std::cerr << "error (" << rtt::error_kind_name(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == rtt::ErrorKind::config || e.kind() == rtt::ErrorKind::io
               ? kExitUsage
               : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
