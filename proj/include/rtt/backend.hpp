#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "rtt/error.hpp"
#include "rtt/prompt.hpp"
#include "rtt/sampling.hpp"
#include "rtt/toy_model.hpp"

namespace rtt {

struct GenerationResult {
  std::vector<std::string> samples;
  std::vector<int> token_counts;
  std::string backend_name;
};

// Uniform sampling interface over generation backends. Implementations must
// be safe for concurrent generate() calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual GenerationResult generate(const ModelProfile& profile,
                                    const PromptPayload& prompt,
                                    const SamplingParams& params) = 0;

  virtual std::string name() const = 0;

  long long call_count() const { return calls_.load(); }

 protected:
  void note_call() { ++calls_; }

  void check_inputs(const ModelProfile& profile, const PromptPayload& prompt,
                    const SamplingParams& params) const {
    validate_params(params);
    if (!fits_context(profile, prompt, params.max_new_tokens)) {
      throw Error(ErrorKind::context_overflow,
                  "prompt of ~" + std::to_string(prompt.approx_token_count) +
                      " tokens exceeds window " + std::to_string(profile.context_window));
    }
  }

 private:
  std::atomic<long long> calls_{0};
};

// Deletes whole-word occurrences of each banned word. The masking story for
// backends that produce strings rather than token distributions.
inline std::string scrub_banned_words(std::string text,
                                      const std::vector<std::string>& banned) {
  for (const auto& word : banned) {
    if (word.empty()) continue;
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
      text.erase(pos, word.size());
    }
  }
  return text;
}

struct ScriptedRule {
  std::string when_contains;  // substring of the rendered prompt; empty matches all
  std::vector<std::string> responses;  // cycled over the sample index
};

// Deterministic mock: first matching rule wins, its responses cycle across
// the requested samples. Pure given its inputs, so trivially thread-safe.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedRule> rules,
                           std::string name = "scripted")
      : rules_(std::move(rules)), name_(std::move(name)) {}

  // convenience: constant response for every prompt
  static ScriptedBackend constant(std::string response, std::string name = "scripted") {
    return ScriptedBackend({ScriptedRule{"", {std::move(response)}}}, std::move(name));
  }

  GenerationResult generate(const ModelProfile& profile, const PromptPayload& prompt,
                            const SamplingParams& params) override {
    check_inputs(profile, prompt, params);
    note_call();
    std::string rendered = prompt.rendered_text();
    const ScriptedRule* rule = nullptr;
    for (const auto& r : rules_) {
      if (r.when_contains.empty() || rendered.find(r.when_contains) != std::string::npos) {
        rule = &r;
        break;
      }
    }
    if (!rule || rule->responses.empty()) {
      throw Error(ErrorKind::malformed_response,
                  "scripted backend has no rule for this prompt");
    }
    GenerationResult result;
    result.backend_name = name_;
    for (int i = 0; i < params.num_samples; ++i) {
      std::string sample = rule->responses[i % rule->responses.size()];
      sample = scrub_banned_words(std::move(sample), profile.banned_words);
      result.token_counts.push_back(approx_token_count(sample));
      result.samples.push_back(std::move(sample));
    }
    return result;
  }

  std::string name() const override { return name_; }

 private:
  std::vector<ScriptedRule> rules_;
  std::string name_;
};

// Backend over a ToyChannelModel: seeded ancestral sampling, or
// length-normalized beam search when num_beams > 1. Samples are the token
// sequences joined by spaces, end token dropped.
class ToyBackend : public Backend {
 public:
  explicit ToyBackend(ToyChannelModel model, std::string name = "toy")
      : model_(std::move(model)), name_(std::move(name)) {
    validate_toy_model(model_);
  }

  GenerationResult generate(const ModelProfile& profile, const PromptPayload& prompt,
                            const SamplingParams& params) override {
    check_inputs(profile, prompt, params);
    note_call();
    // Stationary models ignore the conditioning text; exact-table models are
    // driven through the toy_* functions directly rather than this backend.
    TokenSeq source;
    std::vector<TokenSeq> seqs =
        params.num_beams > 1
            ? toy_beam_search(model_, source, params, profile.banned_words)
            : toy_sample(model_, source, params, profile.banned_words);
    GenerationResult result;
    result.backend_name = name_;
    for (const auto& seq : seqs) {
      std::string text;
      for (const auto& tok : seq) {
        if (tok == model_.eos) continue;
        if (!text.empty()) text += ' ';
        text += tok;
      }
      result.token_counts.push_back(static_cast<int>(seq.size()));
      result.samples.push_back(std::move(text));
    }
    return result;
  }

  std::string name() const override { return name_; }

  const ToyChannelModel& model() const { return model_; }

 private:
  ToyChannelModel model_;
  std::string name_;
};

}  // namespace rtt
