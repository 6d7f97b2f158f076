#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtt/error.hpp"

namespace rtt {

inline constexpr double kBleuEpsilon = 1e-9;

// N-grams are encoded as their tokens joined by a 0x1f separator so they can
// key hash maps directly.
inline std::string encode_ngram(const std::vector<std::string>& tokens,
                                std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) key += '\x1f';
    key += tokens[start + i];
  }
  return key;
}

inline std::vector<std::string> decode_ngram(const std::string& key) {
  std::vector<std::string> out(1);
  for (char c : key) {
    if (c == '\x1f') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

using NgramCounts = std::unordered_map<std::string, long long>;

inline NgramCounts count_ngrams(const std::vector<std::string>& tokens,
                                std::size_t n) {
  NgramCounts counts;
  if (tokens.size() >= n && n > 0) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      ++counts[encode_ngram(tokens, i, n)];
    }
  }
  return counts;
}

// Corpus-frequent n-grams that CrystalBLEU discounts as syntactic noise.
struct NgramSet {
  int n_lo = 1;
  int n_hi = 4;
  NgramCounts entries;

  bool contains(const std::string& key) const { return entries.count(key) > 0; }
  bool empty() const { return entries.empty(); }
};

// The k most frequent n-grams (n in 1..4) over the corpus. Ties prefer
// shorter n-grams, then lexicographic token order.
inline NgramSet extract_trivially_shared(
    const std::vector<std::vector<std::string>>& corpus, std::size_t k = 500) {
  if (corpus.empty()) {
    throw Error(ErrorKind::empty_corpus, "trivially-shared n-grams need a corpus");
  }
  NgramSet result;
  NgramCounts totals;
  for (const auto& seq : corpus) {
    for (int n = result.n_lo; n <= result.n_hi; ++n) {
      for (auto& [key, cnt] : count_ngrams(seq, static_cast<std::size_t>(n))) {
        totals[key] += cnt;
      }
    }
  }
  struct Entry {
    long long count;
    std::vector<std::string> toks;
    std::string key;
  };
  std::vector<Entry> entries;
  entries.reserve(totals.size());
  for (auto& [key, cnt] : totals) {
    entries.push_back({cnt, decode_ngram(key), key});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.toks.size() != b.toks.size()) return a.toks.size() < b.toks.size();
    return a.toks < b.toks;
  });
  if (entries.size() > k) entries.resize(k);
  for (auto& e : entries) {
    result.entries.emplace(std::move(e.key), e.count);
  }
  return result;
}

namespace detail {

// Modified n-gram precision with clipping. Orders where both sides have no
// n-grams at all count as vacuously perfect so identical pairs score exactly
// 1.0; zero precisions get the epsilon floor instead of -inf.
inline double clipped_precision(const NgramCounts& cand, const NgramCounts& ref) {
  long long total = 0;
  long long matched = 0;
  for (const auto& [key, cnt] : cand) {
    total += cnt;
    auto it = ref.find(key);
    if (it != ref.end()) matched += std::min(cnt, it->second);
  }
  if (total == 0) {
    return ref.empty() ? 1.0 : kBleuEpsilon;
  }
  if (matched == 0) return kBleuEpsilon;
  return static_cast<double>(matched) / static_cast<double>(total);
}

inline double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
  if (cand_len >= ref_len) return 1.0;
  if (cand_len == 0) return 0.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

inline void remove_shared(NgramCounts& counts, const NgramSet& shared) {
  for (auto it = counts.begin(); it != counts.end();) {
    if (shared.contains(it->first)) {
      it = counts.erase(it);
    } else {
      ++it;
    }
  }
}

inline double bleu_from_counts(const std::vector<std::string>& cand,
                               const std::vector<std::string>& ref,
                               const NgramSet* shared) {
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    NgramCounts c = count_ngrams(cand, static_cast<std::size_t>(n));
    NgramCounts r = count_ngrams(ref, static_cast<std::size_t>(n));
    if (shared) {
      remove_shared(c, *shared);
      remove_shared(r, *shared);
    }
    log_sum += 0.25 * std::log(clipped_precision(c, r));
  }
  return brevity_penalty(cand.size(), ref.size()) * std::exp(log_sum);
}

}  // namespace detail

// BLEU-4, uniform weights, brevity penalty exp(1 - r/c) for short candidates.
inline double compute_bleu(const std::vector<std::string>& candidate_tokens,
                           const std::vector<std::string>& reference_tokens) {
  if (reference_tokens.empty()) {
    throw Error(ErrorKind::empty_reference, "BLEU needs a non-empty reference");
  }
  return detail::bleu_from_counts(candidate_tokens, reference_tokens, nullptr);
}

// BLEU-4 after deleting every occurrence of a trivially-shared n-gram from
// both sides. With an empty shared set this is compute_bleu, bit for bit.
inline double compute_crystalbleu(const std::vector<std::string>& candidate_tokens,
                                  const std::vector<std::string>& reference_tokens,
                                  const NgramSet& shared) {
  if (reference_tokens.empty()) {
    throw Error(ErrorKind::empty_reference, "CrystalBLEU needs a non-empty reference");
  }
  return detail::bleu_from_counts(candidate_tokens, reference_tokens, &shared);
}

}  // namespace rtt
