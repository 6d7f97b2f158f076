#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "rtt/metrics.hpp"

namespace rtt {

// One backward-translation output with its lineage. Position A1..E5 is
// intermediate letter x backward sample number.
struct CandidatePatch {
  std::string bug_id;
  std::uint64_t run_seed = 0;
  int intermediate_index = 0;  // 0..4 shown as A..E
  int sample_index = 1;        // 1..5
  std::string raw_output;
  std::string extracted_code;
  bool skipped = false;
  std::string error;
  std::optional<CandidateEvaluation> evaluation;

  std::string position() const {
    if (skipped) return "";
    return std::string(1, static_cast<char>('A' + intermediate_index)) +
           std::to_string(sample_index);
  }
};

inline std::string position_label(int intermediate_index, int sample_index) {
  return std::string(1, static_cast<char>('A' + intermediate_index)) +
         std::to_string(sample_index);
}

// All candidate records produced under one seed, in manifest bug order.
struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<CandidatePatch> records;
};

namespace detail {

// metric values are serialized at 6 decimal places
inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace detail

// Single-line dump that survives arbitrary backend bytes: invalid UTF-8 is
// replaced instead of throwing mid-run.
inline std::string dump_record(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline nlohmann::json evaluation_to_json(const CandidateEvaluation& eval) {
  nlohmann::json j;
  j["compilable"] = eval.compilable;
  j["plausible"] = eval.plausible;
  j["test_pass_rate"] = detail::round6(eval.test_pass_rate);
  if (eval.exact_match) j["exact_match"] = *eval.exact_match;
  if (eval.bleu) j["bleu"] = detail::round6(*eval.bleu);
  if (eval.codebleu) j["codebleu"] = detail::round6(*eval.codebleu);
  if (eval.crystalbleu) j["crystalbleu"] = detail::round6(*eval.crystalbleu);
  if (eval.codebleu_components) {
    nlohmann::json c;
    c["ngram"] = detail::round6(eval.codebleu_components->ngram);
    c["weighted_ngram"] = detail::round6(eval.codebleu_components->weighted_ngram);
    if (eval.codebleu_components->syntax) {
      c["syntax"] = detail::round6(*eval.codebleu_components->syntax);
    }
    if (eval.codebleu_components->dataflow) {
      c["dataflow"] = detail::round6(*eval.codebleu_components->dataflow);
    }
    j["codebleu_components"] = std::move(c);
  }
  j["compile_log"] = eval.compile_log;
  j["test_log"] = eval.test_log;
  return j;
}

inline CandidateEvaluation evaluation_from_json(const nlohmann::json& j) {
  CandidateEvaluation eval;
  eval.compilable = j.value("compilable", 0);
  eval.plausible = j.value("plausible", 0);
  eval.test_pass_rate = j.value("test_pass_rate", 0.0);
  if (j.contains("exact_match")) eval.exact_match = j["exact_match"].get<int>();
  if (j.contains("bleu")) eval.bleu = j["bleu"].get<double>();
  if (j.contains("codebleu")) eval.codebleu = j["codebleu"].get<double>();
  if (j.contains("crystalbleu")) eval.crystalbleu = j["crystalbleu"].get<double>();
  if (j.contains("codebleu_components")) {
    CodeBleuResult cb;
    const auto& c = j["codebleu_components"];
    cb.score = eval.codebleu.value_or(0.0);
    cb.ngram = c.value("ngram", 0.0);
    cb.weighted_ngram = c.value("weighted_ngram", 0.0);
    if (c.contains("syntax")) cb.syntax = c["syntax"].get<double>();
    if (c.contains("dataflow")) cb.dataflow = c["dataflow"].get<double>();
    eval.codebleu_components = cb;
  }
  eval.compile_log = j.value("compile_log", "");
  eval.test_log = j.value("test_log", "");
  return eval;
}

inline nlohmann::json candidate_to_json(const CandidatePatch& c) {
  nlohmann::json j;
  j["bug_id"] = c.bug_id;
  j["run_seed"] = c.run_seed;
  j["position"] = c.position();
  j["raw_output"] = c.raw_output;
  j["extracted_code"] = c.extracted_code;
  j["skipped"] = c.skipped;
  if (!c.error.empty()) j["error"] = c.error;
  if (c.evaluation) j["evaluation"] = evaluation_to_json(*c.evaluation);
  return j;
}

inline CandidatePatch candidate_from_json(const nlohmann::json& j) {
  CandidatePatch c;
  c.bug_id = j.at("bug_id").get<std::string>();
  c.run_seed = j.at("run_seed").get<std::uint64_t>();
  c.skipped = j.value("skipped", false);
  std::string pos = j.value("position", "");
  if (pos.size() >= 2) {
    c.intermediate_index = pos[0] - 'A';
    c.sample_index = std::stoi(pos.substr(1));
  } else {
    c.sample_index = 0;  // whole-bug skip sentinel
  }
  c.raw_output = j.value("raw_output", "");
  c.extracted_code = j.value("extracted_code", "");
  c.error = j.value("error", "");
  if (j.contains("evaluation")) {
    c.evaluation = evaluation_from_json(j["evaluation"]);
  }
  return c;
}

}  // namespace rtt
