#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rtt/error.hpp"
#include "rtt/sampling.hpp"

namespace rtt {

using TokenSeq = std::vector<std::string>;

// Exactly enumerable autoregressive channel: every (source, target-prefix)
// context maps to an explicit distribution over the vocabulary, generation
// stops at the end token or at max_length. Small enough to integrate by
// brute force, which is the whole point.
struct ToyChannelModel {
  TokenSeq vocabulary;  // ordered; includes eos
  std::string eos = "<eos>";
  // context key -> probabilities aligned with `vocabulary`
  std::unordered_map<std::string, std::vector<double>> table;
  int max_length = 4;
  bool ignore_source = false;  // stationary models reuse one table for any source

  static std::string context_key(const TokenSeq& source, const TokenSeq& prefix,
                                 bool ignore_src) {
    std::string key;
    if (!ignore_src) {
      for (std::size_t i = 0; i < source.size(); ++i) {
        if (i) key += '\x1f';
        key += source[i];
      }
    }
    key += '\x1e';
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (i) key += '\x1f';
      key += prefix[i];
    }
    return key;
  }

  void set_distribution(const TokenSeq& source, const TokenSeq& prefix,
                        std::vector<double> probs) {
    table[context_key(source, prefix, ignore_source)] = std::move(probs);
  }

  const std::vector<double>& distribution(const TokenSeq& source,
                                          const TokenSeq& prefix) const {
    auto it = table.find(context_key(source, prefix, ignore_source));
    if (it == table.end()) {
      throw Error(ErrorKind::missing_context,
                  "toy model has no distribution for prefix length " +
                      std::to_string(prefix.size()));
    }
    return it->second;
  }

  std::size_t token_index(const std::string& token) const {
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
      if (vocabulary[i] == token) return i;
    }
    throw Error(ErrorKind::unknown_token, "token '" + token + "' not in vocabulary");
  }
};

// Builds a model that applies the same conditional distribution in every
// reachable context of any source drawn from `sources` (or of all sources
// when ignore_source is used).
inline ToyChannelModel make_stationary_toy_model(TokenSeq vocabulary,
                                                 const std::string& eos,
                                                 std::vector<double> probs,
                                                 int max_length,
                                                 bool ignore_source = true) {
  ToyChannelModel model;
  model.vocabulary = std::move(vocabulary);
  model.eos = eos;
  model.max_length = max_length;
  model.ignore_source = ignore_source;
  // enumerate all prefixes over non-eos tokens up to max_length-1
  TokenSeq non_eos;
  for (const auto& t : model.vocabulary) {
    if (t != eos) non_eos.push_back(t);
  }
  std::vector<TokenSeq> frontier = {{}};
  for (int len = 0; len < max_length; ++len) {
    std::vector<TokenSeq> next;
    for (const auto& prefix : frontier) {
      model.set_distribution({}, prefix, probs);
      if (len + 1 < max_length) {
        for (const auto& t : non_eos) {
          TokenSeq extended = prefix;
          extended.push_back(t);
          next.push_back(std::move(extended));
        }
      }
    }
    frontier = std::move(next);
  }
  return model;
}

inline void validate_toy_model(const ToyChannelModel& model) {
  if (model.max_length <= 0) {
    throw Error(ErrorKind::invariant, "max_length must be positive");
  }
  std::size_t eos_idx;
  try {
    eos_idx = model.token_index(model.eos);
  } catch (const Error&) {
    throw Error(ErrorKind::invariant, "vocabulary must contain the end token");
  }
  // Termination is structural: a sequence ends at the end token or at
  // max_length, so zero end-token mass in a context is legal (deterministic
  // channels rely on it).
  (void)eos_idx;
  for (const auto& [key, probs] : model.table) {
    if (probs.size() != model.vocabulary.size()) {
      throw Error(ErrorKind::invariant, "distribution arity mismatch");
    }
    double sum = 0;
    for (double p : probs) {
      if (p < 0) throw Error(ErrorKind::invariant, "negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw Error(ErrorKind::invariant,
                  "distribution sums to " + std::to_string(sum) + ", not 1");
    }
  }
}

// P(target | source) as the product of stepwise conditionals. The target
// must end with the end token or have exactly max_length tokens.
inline double toy_sequence_probability(const ToyChannelModel& model,
                                       const TokenSeq& source, const TokenSeq& target) {
  if (target.empty()) {
    throw Error(ErrorKind::config, "target must not be empty");
  }
  if (target.back() != model.eos &&
      static_cast<int>(target.size()) != model.max_length) {
    throw Error(ErrorKind::config,
                "target must end with the end token or reach max_length");
  }
  double prob = 1.0;
  TokenSeq prefix;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (i + 1 < target.size() && target[i] == model.eos) {
      throw Error(ErrorKind::config, "end token inside target");
    }
    std::size_t idx = model.token_index(target[i]);
    const auto& dist = model.distribution(source, prefix);
    prob *= dist[idx];
    if (prob == 0.0) return 0.0;
    prefix.push_back(target[i]);
  }
  return prob;
}

// All terminating sequences with positive probability, with P > 0, in
// lexicographic generation order.
inline std::vector<std::pair<TokenSeq, double>> enumerate_terminating_sequences(
    const ToyChannelModel& model, const TokenSeq& source,
    std::size_t cap = 1'000'000) {
  std::vector<std::pair<TokenSeq, double>> out;
  struct Frame {
    TokenSeq prefix;
    double prob;
  };
  std::vector<Frame> stack = {{{}, 1.0}};
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto& dist = model.distribution(source, frame.prefix);
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
      double p = dist[i];
      if (p <= 0) continue;
      const std::string& tok = model.vocabulary[i];
      double prob = frame.prob * p;
      TokenSeq seq = frame.prefix;
      seq.push_back(tok);
      if (tok == model.eos || static_cast<int>(seq.size()) == model.max_length) {
        out.emplace_back(std::move(seq), prob);
        if (out.size() > cap) {
          throw Error(ErrorKind::enumeration_bound,
                      "terminating-sequence enumeration exceeded cap");
        }
      } else {
        stack.push_back({std::move(seq), prob});
      }
    }
  }
  return out;
}

// Exact round-trip distribution: for every candidate x, sums P(x|r)P(r) over
// all intermediates r the forward channel can emit.
inline std::map<TokenSeq, double> toy_roundtrip_distribution(
    const ToyChannelModel& forward, const ToyChannelModel& backward,
    const TokenSeq& source, std::size_t pair_cap = 2'000'000) {
  std::map<TokenSeq, double> out;
  auto intermediates = enumerate_terminating_sequences(forward, source);
  std::size_t pairs = 0;
  for (const auto& [r, p_r] : intermediates) {
    auto candidates = enumerate_terminating_sequences(backward, r);
    pairs += candidates.size();
    if (pairs > pair_cap) {
      throw Error(ErrorKind::enumeration_bound,
                  "round-trip enumeration exceeded " + std::to_string(pair_cap) +
                      " (r, x) pairs");
    }
    for (const auto& [x, p_x_given_r] : candidates) {
      out[x] += p_r * p_x_given_r;
    }
  }
  return out;
}

namespace detail {

// Bit-exact uniform in [0,1); avoids distribution implementation differences.
inline double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Banned-word masking, temperature, and nucleus filtering over an explicit
// distribution. Temperature 0 collapses to argmax with lexicographic
// tie-break.
inline std::vector<double> adjust_distribution(
    const ToyChannelModel& model, std::vector<double> probs,
    const std::vector<std::string>& banned, double temperature, double top_p) {
  for (const auto& word : banned) {
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
      if (model.vocabulary[i] == word) probs[i] = 0.0;
    }
  }
  double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (mass <= 0) {
    throw Error(ErrorKind::config, "banned words removed all probability mass");
  }
  for (double& p : probs) p /= mass;

  if (temperature == 0.0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] > probs[best] ||
          (probs[i] == probs[best] && model.vocabulary[i] < model.vocabulary[best])) {
        best = i;
      }
    }
    std::vector<double> greedy(probs.size(), 0.0);
    greedy[best] = 1.0;
    return greedy;
  }
  if (temperature != 1.0) {
    double sum = 0;
    for (double& p : probs) {
      p = p > 0 ? std::pow(p, 1.0 / temperature) : 0.0;
      sum += p;
    }
    for (double& p : probs) p /= sum;
  }
  if (top_p < 1.0) {
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (probs[a] != probs[b]) return probs[a] > probs[b];
      return model.vocabulary[a] < model.vocabulary[b];
    });
    double cum = 0;
    std::vector<double> kept(probs.size(), 0.0);
    for (std::size_t idx : order) {
      if (probs[idx] <= 0) break;
      kept[idx] = probs[idx];
      cum += probs[idx];
      if (cum >= top_p) break;
    }
    double sum = std::accumulate(kept.begin(), kept.end(), 0.0);
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = kept[i] / sum;
    probs = std::move(kept);
  }
  return probs;
}

}  // namespace detail

// Seeded ancestral sampling; one RNG stream covers all requested samples.
inline std::vector<TokenSeq> toy_sample(const ToyChannelModel& model,
                                        const TokenSeq& source,
                                        const SamplingParams& params,
                                        const std::vector<std::string>& banned = {}) {
  std::mt19937_64 rng(params.seed.value_or(std::random_device{}()));
  std::vector<TokenSeq> samples;
  for (int s = 0; s < params.num_samples; ++s) {
    TokenSeq seq;
    while (static_cast<int>(seq.size()) < model.max_length) {
      auto probs = detail::adjust_distribution(model, model.distribution(source, seq),
                                               banned, params.temperature, params.top_p);
      double u = detail::next_uniform(rng);
      double cum = 0;
      std::size_t chosen = 0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0) continue;
        chosen = i;  // last positive index absorbs rounding fallout
        cum += probs[i];
        if (u < cum) break;
      }
      seq.push_back(model.vocabulary[chosen]);
      if (model.vocabulary[chosen] == model.eos) break;
    }
    samples.push_back(std::move(seq));
  }
  return samples;
}

// Length-normalized beam search; deterministic, ties broken by lexicographic
// token order. When the model supports fewer distinct sequences than
// requested, results cycle to keep the sample count exact.
inline std::vector<TokenSeq> toy_beam_search(const ToyChannelModel& model,
                                             const TokenSeq& source,
                                             const SamplingParams& params,
                                             const std::vector<std::string>& banned = {}) {
  struct Hyp {
    TokenSeq seq;
    double logprob = 0.0;
  };
  auto hyp_less = [](const Hyp& a, const Hyp& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.seq < b.seq;
  };
  std::vector<Hyp> beams = {{}};
  std::vector<Hyp> done;
  while (!beams.empty()) {
    std::vector<Hyp> expanded;
    for (const auto& hyp : beams) {
      auto probs = detail::adjust_distribution(model, model.distribution(source, hyp.seq),
                                               banned, 1.0, 1.0);
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0) continue;
        Hyp next;
        next.seq = hyp.seq;
        next.seq.push_back(model.vocabulary[i]);
        next.logprob = hyp.logprob + std::log(probs[i]);
        if (model.vocabulary[i] == model.eos ||
            static_cast<int>(next.seq.size()) == model.max_length) {
          done.push_back(std::move(next));
        } else {
          expanded.push_back(std::move(next));
        }
      }
    }
    std::sort(expanded.begin(), expanded.end(), hyp_less);
    if (expanded.size() > static_cast<std::size_t>(params.num_beams)) {
      expanded.resize(params.num_beams);
    }
    beams = std::move(expanded);
  }
  std::sort(done.begin(), done.end(), [](const Hyp& a, const Hyp& b) {
    double na = a.logprob / static_cast<double>(a.seq.size());
    double nb = b.logprob / static_cast<double>(b.seq.size());
    if (na != nb) return na > nb;
    return a.seq < b.seq;
  });
  std::vector<TokenSeq> out;
  for (int i = 0; i < params.num_samples; ++i) {
    out.push_back(done[i % done.size()].seq);
  }
  return out;
}

}  // namespace rtt
