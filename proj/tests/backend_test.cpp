#include "rtt/backend.hpp"

#include <gtest/gtest.h>

using rtt::GenerationResult;
using rtt::ModelProfile;
using rtt::PromptPayload;
using rtt::PromptStyle;
using rtt::SamplingParams;
using rtt::ScriptedBackend;
using rtt::ScriptedRule;
using rtt::ToyBackend;

namespace {

ModelProfile profile(int window = 4096) {
  ModelProfile p;
  p.name = "test";
  p.style = PromptStyle::chat;
  p.context_window = window;
  return p;
}

PromptPayload prompt(const std::string& text) {
  PromptPayload payload;
  payload.style = PromptStyle::chat;
  payload.system_message = "sys";
  payload.user_text = text;
  payload.approx_token_count = rtt::approx_token_count(payload.rendered_text());
  return payload;
}

TEST(Scripted, ConstantMockRepeatsForEverySample) {
  auto backend = ScriptedBackend::constant("fixed body");
  SamplingParams params;
  params.num_samples = 3;
  GenerationResult result = backend.generate(profile(), prompt("anything"), params);
  EXPECT_EQ(result.samples,
            (std::vector<std::string>{"fixed body", "fixed body", "fixed body"}));
  EXPECT_EQ(result.token_counts.size(), 3u);
  EXPECT_EQ(backend.call_count(), 1);
}

TEST(Scripted, FirstMatchingRuleWinsAndResponsesCycle) {
  ScriptedBackend backend({
      ScriptedRule{"alpha", {"a1", "a2"}},
      ScriptedRule{"", {"default"}},
  });
  SamplingParams params;
  params.num_samples = 5;
  auto hit = backend.generate(profile(), prompt("contains alpha here"), params);
  EXPECT_EQ(hit.samples, (std::vector<std::string>{"a1", "a2", "a1", "a2", "a1"}));
  auto missed = backend.generate(profile(), prompt("nothing"), params);
  EXPECT_EQ(missed.samples[0], "default");
}

TEST(Scripted, NoMatchingRuleIsMalformedResponse) {
  ScriptedBackend backend({ScriptedRule{"needle", {"x"}}});
  SamplingParams params;
  try {
    backend.generate(profile(), prompt("haystack"), params);
    FAIL();
  } catch (const rtt::Error& e) {
    EXPECT_EQ(e.kind(), rtt::ErrorKind::malformed_response);
  }
}

TEST(Scripted, BannedWordsAreScrubbedFromOutput) {
  auto backend = ScriptedBackend::constant("fix // TODO later\nbody");
  ModelProfile p = profile();
  p.banned_words = {"TODO"};
  SamplingParams params;
  auto result = backend.generate(p, prompt("x"), params);
  EXPECT_EQ(result.samples[0].find("TODO"), std::string::npos);
  EXPECT_EQ(result.samples[0], "fix //  later\nbody");
}

TEST(Scripted, OversizedPromptIsContextOverflow) {
  auto backend = ScriptedBackend::constant("x");
  SamplingParams params;
  params.max_new_tokens = 10;
  try {
    backend.generate(profile(8), prompt(std::string(1000, 'q')), params);
    FAIL();
  } catch (const rtt::Error& e) {
    EXPECT_EQ(e.kind(), rtt::ErrorKind::context_overflow);
  }
  EXPECT_EQ(backend.call_count(), 0);  // rejected before counting as a call
}

TEST(Scripted, InvalidParamsRejected) {
  auto backend = ScriptedBackend::constant("x");
  SamplingParams params;
  params.num_beams = 2;
  params.num_samples = 3;  // violates num_samples <= num_beams
  EXPECT_THROW(backend.generate(profile(), prompt("p"), params), rtt::Error);
}

TEST(Toy, DeterministicChannelIdenticalAcrossSeeds) {
  rtt::ToyChannelModel m;
  m.vocabulary = {"y", "<eos>"};
  m.eos = "<eos>";
  m.max_length = 3;
  m.ignore_source = true;
  m.set_distribution({}, {}, {1.0, 0.0});
  m.set_distribution({}, {"y"}, {0.0, 1.0});
  ToyBackend backend(std::move(m));
  SamplingParams params;
  params.num_samples = 2;
  params.seed = 1;
  auto a = backend.generate(profile(), prompt("p"), params);
  params.seed = 12345;
  auto b = backend.generate(profile(), prompt("p"), params);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.samples[0], "y");  // eos dropped from the joined text
}

// golden fixture: uniform {a,b,<eos>} channel, seed 7, five samples; values
// recorded from the sampler once and pinned (see GoldenSeededSamples body)
TEST(Toy, GoldenSeededSamples) {
  auto m = rtt::make_stationary_toy_model({"a", "b", "<eos>"}, "<eos>",
                                          {1.0 / 3, 1.0 / 3, 1.0 / 3}, 4);
  ToyBackend backend(std::move(m));
  SamplingParams params;
  params.num_samples = 5;
  params.seed = 7;
  auto first = backend.generate(profile(), prompt("p"), params);
  auto second = backend.generate(profile(), prompt("p"), params);
  EXPECT_EQ(first.samples, second.samples);
  std::vector<std::string> golden = {"", "", "a", "a a", ""};
  EXPECT_EQ(first.samples, golden);
}

TEST(Toy, TokenCountsIncludeTerminator) {
  rtt::ToyChannelModel m;
  m.vocabulary = {"y", "<eos>"};
  m.eos = "<eos>";
  m.max_length = 3;
  m.ignore_source = true;
  m.set_distribution({}, {}, {1.0, 0.0});
  m.set_distribution({}, {"y"}, {0.0, 1.0});
  ToyBackend backend(std::move(m));
  SamplingParams params;
  params.seed = 0;
  auto result = backend.generate(profile(), prompt("p"), params);
  EXPECT_EQ(result.token_counts[0], 2);  // y + <eos>
}

TEST(Toy, BeamPathProducesExactSampleCount) {
  auto m = rtt::make_stationary_toy_model({"a", "b", "<eos>"}, "<eos>",
                                          {0.5, 0.3, 0.2}, 3);
  ToyBackend backend(std::move(m));
  SamplingParams params;
  params.num_beams = 4;
  params.num_samples = 4;
  auto result = backend.generate(profile(), prompt("p"), params);
  EXPECT_EQ(result.samples.size(), 4u);
  // beam is deterministic: repeated calls agree without a seed
  auto again = backend.generate(profile(), prompt("p"), params);
  EXPECT_EQ(result.samples, again.samples);
}

}  // namespace
