#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "rtt/backend.hpp"
#include "rtt/error.hpp"
#include "rtt/http_backend.hpp"
#include "rtt/manifest.hpp"
#include "rtt/sampling.hpp"
#include "rtt/toy_model.hpp"

namespace rtt {

// How a profile reaches its model. Profiles are editable config files; the
// backend section picks one of the three implementations.
struct BackendConfig {
  std::string kind = "openai";  // openai | scripted | toy
  // openai
  std::string base_url;
  std::string model;
  int max_in_flight = 4;
  int retries = 0;
  int timeout_seconds = 120;
  // scripted
  std::vector<ScriptedRule> rules;
  // toy (stationary channel)
  TokenSeq vocabulary;
  std::string eos = "<eos>";
  std::vector<double> probs;
  int max_length = 6;
};

struct ProfileConfig {
  ModelProfile profile;
  BackendConfig backend;
};

namespace detail {

inline SamplingParams params_from_json(const nlohmann::json& j) {
  SamplingParams p;
  p.temperature = j.value("temperature", 1.0);
  p.top_p = j.value("top_p", 1.0);
  p.num_beams = j.value("num_beams", 1);
  p.num_samples = j.value("num_samples", 5);
  p.max_new_tokens = j.value("max_new_tokens", 512);
  if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
  return p;
}

}  // namespace detail

inline ProfileConfig load_profile_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::io, "profile not found: " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, "profile parse error: " + std::string(e.what()));
  }
  ProfileConfig config;
  ModelProfile& p = config.profile;
  p.name = j.value("name", path.stem().string());
  std::string style = j.value("style", "chat");
  if (style == "chat") {
    p.style = PromptStyle::chat;
  } else if (style == "infill") {
    p.style = PromptStyle::infill;
  } else if (style == "seq2seq") {
    p.style = PromptStyle::seq2seq;
  } else {
    throw Error(ErrorKind::config, "unknown style '" + style + "'");
  }
  p.context_window = j.value("context_window", 4096);
  p.seedable = j.value("seedable", false);
  p.strip_newlines = j.value("strip_newlines", false);
  if (j.contains("file_header")) p.file_header = j["file_header"].get<std::string>();
  for (const auto& w : j.value("banned_words", nlohmann::json::array())) {
    p.banned_words.push_back(w.get<std::string>());
  }
  if (j.contains("forward")) p.forward_params = detail::params_from_json(j["forward"]);
  if (j.contains("backward")) p.backward_params = detail::params_from_json(j["backward"]);
  validate_profile(p);

  if (j.contains("backend")) {
    const auto& b = j["backend"];
    BackendConfig& bc = config.backend;
    bc.kind = b.value("kind", "openai");
    bc.base_url = b.value("base_url", "");
    bc.model = b.value("model", "");
    bc.max_in_flight = b.value("max_in_flight", 4);
    bc.retries = b.value("retries", 0);
    bc.timeout_seconds = b.value("timeout_seconds", 120);
    for (const auto& rj : b.value("rules", nlohmann::json::array())) {
      ScriptedRule rule;
      rule.when_contains = rj.value("when_contains", "");
      for (const auto& r : rj.value("responses", nlohmann::json::array())) {
        rule.responses.push_back(r.get<std::string>());
      }
      bc.rules.push_back(std::move(rule));
    }
    if (b.contains("vocabulary")) {
      for (const auto& t : b["vocabulary"]) bc.vocabulary.push_back(t.get<std::string>());
    }
    bc.eos = b.value("eos", "<eos>");
    if (b.contains("probs")) {
      for (const auto& v : b["probs"]) bc.probs.push_back(v.get<double>());
    }
    bc.max_length = b.value("max_length", 6);
  }
  return config;
}

// Instantiates the backend a profile asks for. Remote transcripts land in
// the given run directory.
inline std::unique_ptr<Backend> make_backend(const ProfileConfig& config,
                                             const std::filesystem::path& run_dir = {}) {
  const BackendConfig& bc = config.backend;
  if (bc.kind == "scripted") {
    if (bc.rules.empty()) {
      throw Error(ErrorKind::config, "scripted backend needs at least one rule");
    }
    return std::make_unique<ScriptedBackend>(bc.rules,
                                             "scripted:" + config.profile.name);
  }
  if (bc.kind == "toy") {
    if (bc.vocabulary.empty() || bc.probs.size() != bc.vocabulary.size()) {
      throw Error(ErrorKind::config, "toy backend needs vocabulary and matching probs");
    }
    ToyChannelModel model = make_stationary_toy_model(bc.vocabulary, bc.eos, bc.probs,
                                                      bc.max_length, true);
    return std::make_unique<ToyBackend>(std::move(model), "toy:" + config.profile.name);
  }
  if (bc.kind == "openai") {
    HttpBackend::Options opts;
    opts.base_url = bc.base_url;
    if (opts.base_url.empty()) {
      if (const char* env = std::getenv("RTT_BASE_URL")) opts.base_url = env;
    }
    if (opts.base_url.empty()) {
      throw Error(ErrorKind::config,
                  "openai backend needs base_url (profile or RTT_BASE_URL)");
    }
    opts.model = bc.model.empty() ? config.profile.name : bc.model;
    opts.max_in_flight = bc.max_in_flight;
    opts.retries = bc.retries;
    opts.timeout_seconds = bc.timeout_seconds;
    if (!run_dir.empty()) {
      std::filesystem::create_directories(run_dir);
      opts.transcript_path = (run_dir / "transcript.ndjson").string();
    }
    return std::make_unique<HttpBackend>(std::move(opts));
  }
  throw Error(ErrorKind::config, "unknown backend kind '" + bc.kind + "'");
}

}  // namespace rtt
