#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rtt/backend.hpp"
#include "rtt/bleu.hpp"
#include "rtt/error.hpp"
#include "rtt/harness.hpp"
#include "rtt/hash.hpp"
#include "rtt/manifest.hpp"
#include "rtt/metrics.hpp"
#include "rtt/prompt.hpp"
#include "rtt/records.hpp"

namespace rtt {

// ---------------------------------------------------------------------------
// Step 1: preprocessing

struct PreparedInput {
  std::string text;
  std::string signature;
};

// Everything before the first '{', trimmed. Fallback when a manifest does
// not carry the signature explicitly.
inline std::string extract_signature(std::string_view function_text) {
  auto brace = function_text.find('{');
  std::string_view head =
      brace == std::string_view::npos ? function_text : function_text.substr(0, brace);
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.front()))) {
    head.remove_prefix(1);
  }
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.back()))) {
    head.remove_suffix(1);
  }
  return std::string(head);
}

inline PreparedInput preprocess(const BugInstance& bug, const ModelProfile& profile,
                                const IntermediateKind& /*intermediate*/) {
  PreparedInput prepared;
  prepared.text = preprocess_text(bug.buggy_code, profile);
  prepared.signature = !bug.function_signature.empty()
                           ? bug.function_signature
                           : extract_signature(bug.buggy_code);
  return prepared;
}

// ---------------------------------------------------------------------------
// Step 3: postprocessing

namespace detail {

// Scans a brace-balanced region starting at `open` (which must point at '{'),
// skipping string/char literals and comments. Returns the index one past the
// matching close brace, or npos if unbalanced.
inline std::size_t balance_braces(std::string_view text, std::size_t open) {
  int depth = 0;
  std::size_t i = open;
  while (i < text.size()) {
    char c = text[i];
    if (c == '"' || c == '\'') {
      char quote = c;
      ++i;
      while (i < text.size() && text[i] != quote) {
        if (text[i] == '\\') ++i;
        ++i;
      }
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      i += 2;
      while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) ++i;
      i = std::min(i + 2, text.size());
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}') {
      --depth;
      if (depth == 0) return i + 1;
    }
    ++i;
  }
  return std::string_view::npos;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Does the text before a '{' look like a function header rather than a
// statement? Cheap shape test, good enough for extraction.
inline bool looks_like_function_header(std::string_view prefix) {
  std::string head = trim(prefix);
  if (head.empty()) return false;
  if (head.find('(') == std::string::npos || head.find(')') == std::string::npos) {
    return false;
  }
  if (head.find(';') != std::string::npos) return false;
  std::string first_word;
  for (char c : head) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      first_word += c;
    } else {
      break;
    }
  }
  static const std::set<std::string> kControl = {"if",     "while", "for",
                                                 "switch", "return", "do", "else"};
  return kControl.count(first_word) == 0;
}

// Contents of the first ``` fence, with a leading single-word language tag
// line removed. Empty optional when there is no fence.
inline std::optional<std::string> strip_fence(std::string_view raw) {
  auto open = raw.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t begin = open + 3;
  auto close = raw.find("```", begin);
  std::string_view inner =
      close == std::string_view::npos ? raw.substr(begin) : raw.substr(begin, close - begin);
  // drop "java"-style tag on the fence line
  auto nl = inner.find('\n');
  if (nl != std::string_view::npos) {
    std::string_view first_line = inner.substr(0, nl);
    bool tag = !first_line.empty();
    for (char c : first_line) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '#') {
        tag = false;
        break;
      }
    }
    if (tag) inner = inner.substr(nl + 1);
  }
  return std::string(inner);
}

}  // namespace detail

// Pulls the code region out of a model response: strips ``` fences and a
// language tag, then takes the brace-balanced function at the signature (or
// at the first brace when the model regenerated the header). No code found
// means an empty string, which correctly fails compilation downstream.
inline std::string extract_code(const std::string& raw_output,
                                const std::string& signature) {
  std::string text = detail::strip_fence(raw_output).value_or(raw_output);

  // prefer the signature occurrence that actually heads a function (only
  // whitespace between it and the opening brace); prose mentions lose
  std::size_t start = std::string::npos;
  if (!signature.empty()) {
    std::size_t first = text.find(signature);
    for (std::size_t pos = first; pos != std::string::npos;
         pos = text.find(signature, pos + 1)) {
      std::size_t after = pos + signature.size();
      while (after < text.size() &&
             std::isspace(static_cast<unsigned char>(text[after]))) {
        ++after;
      }
      if (after < text.size() && text[after] == '{') {
        start = pos;
        break;
      }
    }
    if (start == std::string::npos) start = first;
  }
  if (start != std::string::npos) {
    std::size_t brace = text.find('{', start);
    if (brace == std::string::npos) return detail::trim(text.substr(start));
    std::size_t end = detail::balance_braces(text, brace);
    if (end == std::string::npos) return detail::trim(text.substr(start));
    return detail::trim(text.substr(start, end - start));
  }

  std::size_t brace = text.find('{');
  if (brace == std::string::npos) return "";
  std::size_t line_start = text.rfind('\n', brace);
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  std::size_t end = detail::balance_braces(text, brace);
  if (end == std::string::npos) end = text.size();
  return detail::trim(text.substr(line_start, end - line_start));
}

// NL route: make the candidate start with the canonical signature, wrapping
// bare bodies in braces and replacing regenerated headers.
inline std::string restore_signature_nl(const std::string& body_or_function,
                                        const std::string& signature) {
  std::string text = detail::trim(body_or_function);
  if (text.rfind(signature, 0) == 0) return text;  // already canonical
  std::size_t brace = text.find('{');
  if (brace != std::string::npos &&
      detail::looks_like_function_header(std::string_view(text).substr(0, brace))) {
    return signature + text.substr(brace);
  }
  return signature + " {\n" + text + "\n}";
}

struct OverwriteResult {
  std::string text;
  bool header_found = true;
};

// PL route: keep the translated parameter list and body but force the
// modifiers and name from the original bug, so a candidate is still testable
// after small renames such as an upper-cased function name.
inline OverwriteResult overwrite_scope_and_name_pl(const std::string& translated_function,
                                                   const BugInstance& bug) {
  const std::string& canonical = bug.function_signature;
  std::size_t canon_paren = canonical.find('(');
  std::size_t brace = translated_function.find('{');
  if (brace == std::string::npos || canon_paren == std::string::npos) {
    return {translated_function, false};
  }
  std::string_view header(translated_function.data(), brace);
  std::size_t paren = header.find('(');
  if (paren == std::string_view::npos ||
      !detail::looks_like_function_header(header)) {
    return {translated_function, false};
  }
  return {canonical.substr(0, canon_paren) + translated_function.substr(paren), true};
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  BenchmarkManifest manifest;
  ModelProfile profile;
  IntermediateKind intermediate;
  int k_forward = 5;
  int k_backward = 5;
  std::vector<std::uint64_t> seeds;  // one entry per run
  std::filesystem::path output_dir;
  int worker_limit = 4;
  int retain_failed_workspaces = 0;  // disk quota for kept failure workspaces
};

inline std::vector<std::uint64_t> default_seeds(const ModelProfile& profile) {
  if (!profile.seedable) return {0};
  std::vector<std::uint64_t> seeds(10);
  for (int i = 0; i < 10; ++i) seeds[i] = static_cast<std::uint64_t>(i);
  return seeds;
}

inline void validate_run_config(const RunConfig& config) {
  validate_profile(config.profile);
  if (config.k_forward < 1 || config.k_forward > 5) {
    throw Error(ErrorKind::config, "k_forward must be in [1,5]");
  }
  if (config.k_backward < 1 || config.k_backward > 5) {
    throw Error(ErrorKind::config, "k_backward must be in [1,5]");
  }
  if (config.seeds.empty()) throw Error(ErrorKind::config, "no seeds configured");
  if (config.worker_limit < 1) throw Error(ErrorKind::config, "worker_limit must be >= 1");
  if (config.output_dir.empty()) throw Error(ErrorKind::config, "output_dir missing");
  auto violations = validate_manifest(config.manifest);
  if (!violations.empty()) {
    throw Error(ErrorKind::invariant,
                "manifest failed validation with " +
                    std::to_string(violations.size()) + " violation(s)");
  }
}

// Everything that must match for a run directory to be resumable. Seeds and
// worker counts may differ between invocations, so they stay out.
inline std::string run_config_hash(const RunConfig& config) {
  std::ostringstream key;
  key << config.manifest.benchmark_id << '|' << config.manifest.version << '|';
  for (const auto& bug : config.manifest.bugs) key << bug.id << ',';
  const ModelProfile& p = config.profile;
  key << '|' << p.name << '|' << prompt_style_name(p.style) << '|' << p.context_window
      << '|' << p.seedable << '|' << p.strip_newlines << '|'
      << p.file_header.value_or("");
  for (const auto& w : p.banned_words) key << w << ',';
  auto params_key = [&key](const SamplingParams& sp) {
    key << '|' << sp.temperature << ',' << sp.top_p << ',' << sp.num_beams << ','
        << sp.max_new_tokens;
  };
  params_key(p.forward_params);
  params_key(p.backward_params);
  key << '|' << (config.intermediate.is_nl() ? "nl" : "pl") << ':'
      << config.intermediate.name << '|' << config.k_forward << 'x' << config.k_backward;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(key.str())));
  return buf;
}

// ---------------------------------------------------------------------------
// Step 2 (+3): the two-legged translation for one bug and one seed

namespace detail {

inline std::string postprocess_candidate(const std::string& raw, const BugInstance& bug,
                                         const IntermediateKind& intermediate) {
  std::string extracted = extract_code(raw, bug.function_signature);
  if (extracted.empty()) return extracted;
  if (intermediate.is_nl()) {
    return restore_signature_nl(extracted, bug.function_signature);
  }
  return overwrite_scope_and_name_pl(extracted, bug).text;
}

inline CandidatePatch failed_candidate(const BugInstance& bug, std::uint64_t run_seed,
                                       int intermediate_index, int sample_index,
                                       const std::string& error) {
  CandidatePatch c;
  c.bug_id = bug.id;
  c.run_seed = run_seed;
  c.intermediate_index = intermediate_index;
  c.sample_index = sample_index;
  c.error = error;
  return c;
}

}  // namespace detail

// One forward translation with its lineage slot.
struct IntermediateText {
  std::string bug_id;
  int index = 0;  // 0..k_forward, shown as A..E
  std::string text;
  SamplingParams leg_params;
};

// Runs both legs for one bug. An oversized forward prompt yields a single
// skipped record; backend failures become empty candidates on the affected
// lineage slots and never abort the bug.
inline std::vector<CandidatePatch> round_trip(const BugInstance& bug,
                                              const RunConfig& config, Backend& backend,
                                              std::uint64_t run_seed) {
  const ModelProfile& profile = config.profile;
  const int kf = config.k_forward;
  const int kb = config.k_backward;
  std::vector<CandidatePatch> out;

  PromptPayload forward_prompt = build_forward_prompt(bug, profile, config.intermediate);
  int reserve = default_reserve_output(profile);
  if (!fits_context(profile, forward_prompt, reserve)) {
    CandidatePatch skip;
    skip.bug_id = bug.id;
    skip.run_seed = run_seed;
    skip.skipped = true;
    skip.sample_index = 0;  // whole-bug skip sentinel: no lineage position
    skip.error = "context-overflow: prompt of ~" +
                 std::to_string(forward_prompt.approx_token_count) +
                 " tokens does not fit window " + std::to_string(profile.context_window);
    out.push_back(std::move(skip));
    return out;
  }

  SamplingParams forward_params = profile.forward_params;
  forward_params.num_samples = kf;
  if (profile.seedable) {
    forward_params.seed = derive_leg_seed(run_seed, bug.id, "forward", 0);
  }

  std::vector<IntermediateText> intermediates;
  try {
    GenerationResult fwd = backend.generate(profile, forward_prompt, forward_params);
    for (int i = 0; i < kf; ++i) {
      intermediates.push_back(
          {bug.id, i, fwd.samples[static_cast<std::size_t>(i)], forward_params});
    }
  } catch (const std::exception& e) {
    for (int i = 0; i < kf; ++i) {
      for (int j = 1; j <= kb; ++j) {
        out.push_back(detail::failed_candidate(bug, run_seed, i, j,
                                               std::string("forward leg: ") + e.what()));
      }
    }
    return out;
  }

  for (int i = 0; i < kf; ++i) {
    const std::string& inter = intermediates[static_cast<std::size_t>(i)].text;
    if (inter.empty()) {
      for (int j = 1; j <= kb; ++j) {
        out.push_back(
            detail::failed_candidate(bug, run_seed, i, j, "empty intermediate"));
      }
      continue;
    }
    PromptPayload backward_prompt;
    try {
      backward_prompt = build_backward_prompt(inter, bug, profile, config.intermediate);
    } catch (const std::exception& e) {
      for (int j = 1; j <= kb; ++j) {
        out.push_back(detail::failed_candidate(bug, run_seed, i, j,
                                               std::string("backward prompt: ") + e.what()));
      }
      continue;
    }
    if (!fits_context(profile, backward_prompt, reserve)) {
      // generated translation does not fit: mark the slots, keep the lineage
      for (int j = 1; j <= kb; ++j) {
        CandidatePatch c = detail::failed_candidate(
            bug, run_seed, i, j, "context-overflow on backward leg");
        c.skipped = true;
        out.push_back(std::move(c));
      }
      continue;
    }
    SamplingParams backward_params = profile.backward_params;
    backward_params.num_samples = kb;
    if (profile.seedable) {
      backward_params.seed = derive_leg_seed(run_seed, bug.id, "backward", i);
    }
    try {
      GenerationResult bwd = backend.generate(profile, backward_prompt, backward_params);
      for (int j = 1; j <= kb; ++j) {
        CandidatePatch c;
        c.bug_id = bug.id;
        c.run_seed = run_seed;
        c.intermediate_index = i;
        c.sample_index = j;
        c.raw_output = bwd.samples[static_cast<std::size_t>(j - 1)];
        c.extracted_code =
            detail::postprocess_candidate(c.raw_output, bug, config.intermediate);
        out.push_back(std::move(c));
      }
    } catch (const std::exception& e) {
      for (int j = 1; j <= kb; ++j) {
        out.push_back(detail::failed_candidate(bug, run_seed, i, j,
                                               std::string("backward leg: ") + e.what()));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step 4 + orchestration across seeds and bugs

struct ResultSet {
  std::vector<SeedRun> runs;
  std::map<std::string, int> original_plausible;  // unpatched originals, the baseline side
  PlausibilityGain gain;                          // before vs any-run after
  std::filesystem::path model_dir;                // {out}/{benchmark}/{model}
  long long new_backend_calls = 0;
};

namespace detail {

inline std::filesystem::path seed_dir(const std::filesystem::path& model_dir,
                                      std::uint64_t seed) {
  return model_dir / std::to_string(seed);
}

inline void check_stored_record(const CandidatePatch& record) {
  if (record.evaluation && record.evaluation->plausible &&
      (record.evaluation->test_pass_rate != 100.0 ||
       record.evaluation->compilable != 1)) {
    throw Error(ErrorKind::invariant,
                "record " + record.bug_id + "/" + record.position() +
                    " is plausible without full pass rate");
  }
}

// Append-only writer for one seed file. Bug blocks flush in manifest order
// as soon as all earlier bugs are done, so an interrupted sweep leaves a
// resumable prefix of complete blocks.
struct SeedWriter {
  std::mutex mutex;
  std::ofstream out;
  std::size_t next_bug = 0;

  void open(const std::filesystem::path& model_dir, std::uint64_t seed) {
    std::filesystem::create_directories(seed_dir(model_dir, seed));
    out.open(seed_dir(model_dir, seed) / "candidates.ndjson",
             std::ios::binary | std::ios::trunc);
  }

  // records-per-bug entries are non-empty once computed; empty means pending
  void flush_ready(const std::vector<std::vector<CandidatePatch>>& bugs) {
    std::lock_guard<std::mutex> lock(mutex);
    while (next_bug < bugs.size() && !bugs[next_bug].empty()) {
      for (const auto& record : bugs[next_bug]) {
        check_stored_record(record);
        out << dump_record(candidate_to_json(record)) << "\n";
      }
      out.flush();
      ++next_bug;
    }
  }
};

inline std::map<std::string, std::vector<CandidatePatch>> load_seed_records(
    const std::filesystem::path& model_dir, std::uint64_t seed) {
  std::map<std::string, std::vector<CandidatePatch>> by_bug;
  std::ifstream in(seed_dir(model_dir, seed) / "candidates.ndjson", std::ios::binary);
  if (!in) return by_bug;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      CandidatePatch c = candidate_from_json(nlohmann::json::parse(line));
      by_bug[c.bug_id].push_back(std::move(c));
    } catch (const std::exception&) {
      // partially written line: drop it, the bug will be recomputed
    }
  }
  return by_bug;
}

inline bool bug_records_complete(const std::vector<CandidatePatch>& records, int kf,
                                 int kb) {
  if (records.size() == 1 && records[0].skipped && records[0].sample_index == 0) {
    return true;
  }
  if (records.size() != static_cast<std::size_t>(kf) * kb) return false;
  std::set<std::pair<int, int>> seen;
  for (const auto& r : records) {
    seen.emplace(r.intermediate_index, r.sample_index);
  }
  return seen.size() == static_cast<std::size_t>(kf) * kb;
}

struct EvalContext {
  const RunConfig* config;
  const NgramSet* shared;
  std::filesystem::path scratch;
  std::atomic<int>* retained;
};

inline bool try_reserve_slot(std::atomic<int>& counter, int quota) {
  int cur = counter.load();
  while (cur < quota) {
    if (counter.compare_exchange_weak(cur, cur + 1)) return true;
  }
  return false;
}

inline void evaluate_records(std::vector<CandidatePatch>& records,
                             const BugInstance& bug, const EvalContext& ctx) {
  for (auto& record : records) {
    if (record.skipped) continue;  // skipped implies evaluation absent
    if (record.extracted_code.empty()) {
      // nothing to inject; an empty patch fails at the compile stage
      CandidateEvaluation eval;
      eval.compilable = 0;
      eval.compile_log = "no code extracted";
      if (bug.ground_truth_fix) {
        eval = evaluate_candidate("", bug, {0, "no code extracted", 0}, std::nullopt,
                                  *ctx.shared, ctx.config->manifest.language);
      }
      record.evaluation = eval;
      continue;
    }
    Workspace ws;
    try {
      ws = inject_patch(bug, record.extracted_code, ctx.scratch, record.position());
      CompileOutcome comp = compile_candidate(ws, bug);
      std::optional<TestOutcome> tests;
      if (comp.compilable) tests = run_tests(ws, bug);
      record.evaluation =
          evaluate_candidate(record.extracted_code, bug, comp, tests, *ctx.shared,
                             ctx.config->manifest.language);
      if (record.evaluation->plausible == 0 &&
          try_reserve_slot(*ctx.retained, ctx.config->retain_failed_workspaces)) {
        continue;  // keep this failure workspace for debugging, quota permitting
      }
      cleanup_workspace(ws);
    } catch (const std::exception& e) {
      if (!ws.root.empty()) cleanup_workspace(ws);
      CandidateEvaluation eval;
      eval.compilable = 0;
      eval.compile_log = std::string("harness error: ") + e.what();
      record.evaluation = eval;
    }
  }
}

}  // namespace detail

// Plausibility of the unpatched originals; the baseline side of the
// before/after comparison.
inline std::map<std::string, int> evaluate_originals(
    const BenchmarkManifest& manifest, const std::filesystem::path& scratch) {
  std::map<std::string, int> plausible;
  for (const auto& bug : manifest.bugs) {
    int value = 0;
    try {
      Workspace ws = inject_patch(bug, bug.buggy_code, scratch, "original");
      CompileOutcome comp = compile_candidate(ws, bug);
      if (comp.compilable) {
        TestOutcome tests = run_tests(ws, bug);
        value = (tests.total > 0 && tests.passed == tests.total) ? 1 : 0;
      }
      cleanup_workspace(ws);
    } catch (const std::exception&) {
      value = 0;
    }
    plausible[bug.id] = value;
  }
  return plausible;
}

// Full sweep: every (seed, bug) work item through round_trip and evaluation,
// one candidates.ndjson per seed, resumable, deterministic for seedable
// backends regardless of worker interleaving.
inline ResultSet run_experiment(const RunConfig& config, Backend& backend,
                                std::ostream& progress = std::cerr) {
  namespace fs = std::filesystem;
  validate_run_config(config);

  ResultSet results;
  results.model_dir =
      config.output_dir / config.manifest.benchmark_id / config.profile.name;
  fs::create_directories(results.model_dir);

  // resume safety: refuse to mix records from different configurations
  std::string hash = run_config_hash(config);
  fs::path lock_path = results.model_dir / "manifest.lock";
  if (fs::exists(lock_path)) {
    nlohmann::json lock = nlohmann::json::parse(detail::read_file(lock_path));
    if (lock.value("config_hash", "") != hash) {
      throw Error(ErrorKind::config,
                  "run directory " + results.model_dir.string() +
                      " was produced by a different configuration; refusing to resume");
    }
  } else {
    nlohmann::json lock;
    lock["config_hash"] = hash;
    lock["benchmark_id"] = config.manifest.benchmark_id;
    lock["model"] = config.profile.name;
    lock["intermediate"] =
        (config.intermediate.is_nl() ? "nl:" : "pl:") + config.intermediate.name;
    lock["k_forward"] = config.k_forward;
    lock["k_backward"] = config.k_backward;
    lock["sampling_mode"] = "batched";  // n samples per call, not n calls
    detail::write_file(lock_path, lock.dump(2) + "\n");
  }

  fs::path scratch = results.model_dir / ".scratch";
  fs::create_directories(scratch);

  // shared CrystalBLEU corpus: every buggy function in the manifest
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(config.manifest.bugs.size());
  for (const auto& bug : config.manifest.bugs) {
    corpus.push_back(tokenize_code(bug.buggy_code, config.manifest.language));
  }
  NgramSet shared = extract_trivially_shared(corpus, 500);

  results.original_plausible = evaluate_originals(config.manifest, scratch);

  // work items: (seed, bug) pairs not already complete on disk
  const std::size_t n_bugs = config.manifest.bugs.size();
  std::vector<SeedRun> runs(config.seeds.size());
  std::vector<std::vector<std::vector<CandidatePatch>>> grid(config.seeds.size());
  std::vector<std::unique_ptr<detail::SeedWriter>> writers(config.seeds.size());
  struct WorkItem {
    std::size_t seed_idx;
    std::size_t bug_idx;
  };
  std::vector<WorkItem> work;
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    runs[s].seed = config.seeds[s];
    grid[s].resize(n_bugs);
    auto existing = detail::load_seed_records(results.model_dir, config.seeds[s]);
    for (std::size_t b = 0; b < n_bugs; ++b) {
      auto it = existing.find(config.manifest.bugs[b].id);
      if (it != existing.end() &&
          detail::bug_records_complete(it->second, config.k_forward, config.k_backward)) {
        grid[s][b] = std::move(it->second);
      } else {
        work.push_back({s, b});
      }
    }
    writers[s] = std::make_unique<detail::SeedWriter>();
    writers[s]->open(results.model_dir, config.seeds[s]);
    writers[s]->flush_ready(grid[s]);  // resumed prefix goes out immediately
  }

  std::atomic<int> retained{0};
  detail::EvalContext ctx{&config, &shared, scratch, &retained};
  long long calls_before = backend.call_count();

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= work.size()) break;
      const WorkItem& item = work[idx];
      const BugInstance& bug = config.manifest.bugs[item.bug_idx];
      std::vector<CandidatePatch> records;
      try {
        records = round_trip(bug, config, backend, config.seeds[item.seed_idx]);
      } catch (const std::exception& e) {
        for (int i = 0; i < config.k_forward; ++i) {
          for (int j = 1; j <= config.k_backward; ++j) {
            records.push_back(detail::failed_candidate(
                bug, config.seeds[item.seed_idx], i, j,
                std::string("pipeline error: ") + e.what()));
          }
        }
      }
      detail::evaluate_records(records, bug, ctx);
      grid[item.seed_idx][item.bug_idx] = std::move(records);
      writers[item.seed_idx]->flush_ready(grid[item.seed_idx]);
    }
  };
  int n_workers = std::min<int>(config.worker_limit,
                                static_cast<int>(std::max<std::size_t>(work.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  results.new_backend_calls = backend.call_count() - calls_before;

  // file order is manifest bug order with lineage order inside a bug
  std::map<std::string, int> any_plausible;
  for (const auto& bug : config.manifest.bugs) any_plausible[bug.id] = 0;
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    writers[s]->flush_ready(grid[s]);
    std::set<std::string> run_bugs;
    for (std::size_t b = 0; b < n_bugs; ++b) {
      for (auto& record : grid[s][b]) {
        if (record.evaluation && record.evaluation->plausible) {
          any_plausible[record.bug_id] = 1;
          run_bugs.insert(record.bug_id);
        }
        runs[s].records.push_back(std::move(record));
      }
    }
    progress << "[seed " << runs[s].seed << "] " << n_bugs << " bugs, "
             << runs[s].records.size() << " records, " << run_bugs.size()
             << " repaired\n";
  }
  results.runs = std::move(runs);
  results.gain = benchmark_plausibility_gain(results.original_plausible, any_plausible);

  nlohmann::json summary;
  summary["before_sum"] = results.gain.before_sum;
  summary["after_sum_any_run"] = results.gain.after_sum;
  summary["improved"] = results.gain.improved;
  summary["seeds"] = config.seeds;
  detail::write_file(results.model_dir / "run_summary.json", summary.dump(2) + "\n");

  if (retained.load() == 0) {
    std::error_code ec;
    fs::remove_all(scratch, ec);
  } else {
    progress << "retained " << retained.load() << " failure workspace(s) under "
             << scratch << "\n";
  }
  return results;
}

}  // namespace rtt
