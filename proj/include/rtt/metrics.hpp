#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtt/bleu.hpp"
#include "rtt/codebleu.hpp"
#include "rtt/error.hpp"
#include "rtt/harness.hpp"
#include "rtt/lexer.hpp"
#include "rtt/manifest.hpp"

namespace rtt {

// The seven per-candidate scores plus the compile/test logs they came from.
// Reference-based metrics are absent exactly when the bug has no ground
// truth.
struct CandidateEvaluation {
  int compilable = 0;
  int plausible = 0;
  double test_pass_rate = 0.0;  // [0,100]
  std::optional<int> exact_match;
  std::optional<double> bleu;
  std::optional<double> codebleu;
  std::optional<double> crystalbleu;
  std::optional<CodeBleuResult> codebleu_components;
  std::string compile_log;
  std::string test_log;
};

// 1 iff the token sequences agree (whitespace/comment-insensitive); byte
// mode compares raw bytes instead.
inline int exact_match(const std::string& candidate_text,
                       const std::string& reference_text, bool byte_mode = false,
                       const std::string& language_hint = "") {
  if (byte_mode) return candidate_text == reference_text ? 1 : 0;
  return tokenize_code(candidate_text, language_hint) ==
                 tokenize_code(reference_text, language_hint)
             ? 1
             : 0;
}

namespace detail {

inline std::string clip_log(std::string log, std::size_t cap = 4000) {
  if (log.size() > cap) {
    log.resize(cap);
    log += "...[truncated]";
  }
  return log;
}

}  // namespace detail

// Folds harness outcomes and reference metrics into one evaluation.
// Candidates that failed to compile keep pass rate 0 with tests skipped.
inline CandidateEvaluation evaluate_candidate(const std::string& extracted_code,
                                              const BugInstance& bug,
                                              const CompileOutcome& compile_outcome,
                                              const std::optional<TestOutcome>& tests,
                                              const NgramSet& shared,
                                              const std::string& language_hint = "") {
  CandidateEvaluation eval;
  eval.compilable = compile_outcome.compilable;
  eval.compile_log = detail::clip_log(compile_outcome.log);
  if (eval.compilable && tests) {
    eval.test_pass_rate =
        tests->total > 0 ? 100.0 * tests->passed / tests->total : 0.0;
    eval.plausible = (tests->total > 0 && tests->passed == tests->total) ? 1 : 0;
    std::string log;
    for (const auto& t : tests->per_test) {
      if (t.passed) continue;
      if (!log.empty()) log += "; ";
      log += t.name + ": " + (t.log.empty() ? "failed" : t.log);
    }
    eval.test_log = detail::clip_log(log);
  }
  if (bug.ground_truth_fix) {
    const std::string& ref_text = *bug.ground_truth_fix;
    auto ref_tokens = tokenize_code(ref_text, language_hint);
    if (!ref_tokens.empty()) {
      auto cand_tokens = tokenize_code(extracted_code, language_hint);
      eval.exact_match = exact_match(extracted_code, ref_text, false, language_hint);
      eval.bleu = compute_bleu(cand_tokens, ref_tokens);
      eval.crystalbleu = compute_crystalbleu(cand_tokens, ref_tokens, shared);
      CodeBleuResult cb = compute_codebleu(extracted_code, ref_text, language_hint);
      eval.codebleu = cb.score;
      eval.codebleu_components = cb;
    }
  }
  return eval;
}

struct PlausibilityGain {
  int before_sum = 0;
  int after_sum = 0;
  bool improved = false;
};

// The benchmark-level comparison: does the round-tripped collection pass
// more test suites than the originals? Bug sets must line up exactly.
inline PlausibilityGain benchmark_plausibility_gain(
    const std::map<std::string, int>& original_plausible,
    const std::map<std::string, int>& any_candidate_plausible) {
  if (original_plausible.size() != any_candidate_plausible.size()) {
    throw Error(ErrorKind::bug_set_mismatch,
                "original and candidate sides cover different bug sets");
  }
  PlausibilityGain gain;
  auto it = any_candidate_plausible.begin();
  for (const auto& [bug_id, plausible] : original_plausible) {
    if (it->first != bug_id) {
      throw Error(ErrorKind::bug_set_mismatch, "bug '" + bug_id + "' missing on one side");
    }
    gain.before_sum += plausible ? 1 : 0;
    gain.after_sum += it->second ? 1 : 0;
    ++it;
  }
  gain.improved = gain.after_sum > gain.before_sum;
  return gain;
}

}  // namespace rtt
