#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtt/bleu.hpp"
#include "rtt/error.hpp"
#include "rtt/hash.hpp"
#include "rtt/lexer.hpp"

namespace rtt {

struct CodeBleuResult {
  double score = 0.0;
  double ngram = 0.0;
  double weighted_ngram = 0.0;
  std::optional<double> syntax;
  std::optional<double> dataflow;
};

namespace detail {

// --- weighted n-gram match: keyword-bearing n-grams count 5x ---------------

inline double weighted_precision(const NgramCounts& cand, const NgramCounts& ref,
                                 const std::unordered_set<std::string>& keywords) {
  auto weight_of = [&](const std::string& key) -> double {
    for (const auto& tok : decode_ngram(key)) {
      if (keywords.count(tok)) return 5.0;
    }
    return 1.0;
  };
  double total = 0.0;
  double matched = 0.0;
  for (const auto& [key, cnt] : cand) {
    double w = weight_of(key);
    total += w * static_cast<double>(cnt);
    auto it = ref.find(key);
    if (it != ref.end()) {
      matched += w * static_cast<double>(std::min(cnt, it->second));
    }
  }
  if (total == 0.0) return ref.empty() ? 1.0 : kBleuEpsilon;
  if (matched == 0.0) return kBleuEpsilon;
  return matched / total;
}

inline double weighted_bleu(const std::vector<std::string>& cand,
                            const std::vector<std::string>& ref,
                            const std::unordered_set<std::string>& keywords) {
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    NgramCounts c = count_ngrams(cand, static_cast<std::size_t>(n));
    NgramCounts r = count_ngrams(ref, static_cast<std::size_t>(n));
    log_sum += 0.25 * std::log(weighted_precision(c, r, keywords));
  }
  return brevity_penalty(cand.size(), ref.size()) * std::exp(log_sum);
}

// --- syntax match over a lightweight brace/statement parse -----------------
//
// The tree has group nodes ('{...}' blocks, '(...)' groups), statement nodes
// (semicolon-delimited runs; a closing block also ends its statement), and
// token leaves. Subtrees are compared by a structural hash that includes leaf
// text, so a renamed identifier unmatches exactly the subtrees containing it.

struct SyntaxNode {
  char kind;  // 'r' root, 'b' brace, 'p' paren, 's' statement, 't' token
  std::string token;
  std::vector<std::unique_ptr<SyntaxNode>> children;
};

inline std::unique_ptr<SyntaxNode> parse_group(const std::vector<std::string>& toks,
                                               std::size_t& i, char kind,
                                               const std::string& closer) {
  auto group = std::make_unique<SyntaxNode>();
  group->kind = kind;
  auto stmt = std::make_unique<SyntaxNode>();
  stmt->kind = 's';
  auto flush = [&]() {
    if (!stmt->children.empty()) {
      group->children.push_back(std::move(stmt));
      stmt = std::make_unique<SyntaxNode>();
      stmt->kind = 's';
    }
  };
  while (i < toks.size()) {
    const std::string& t = toks[i];
    if (!closer.empty() && t == closer) {
      ++i;
      break;
    }
    if (t == "{") {
      ++i;
      stmt->children.push_back(parse_group(toks, i, 'b', "}"));
      flush();  // a closed block ends its construct
    } else if (t == "(") {
      ++i;
      stmt->children.push_back(parse_group(toks, i, 'p', ")"));
    } else if (t == ";") {
      ++i;
      flush();
    } else {
      auto leaf = std::make_unique<SyntaxNode>();
      leaf->kind = 't';
      leaf->token = t;
      stmt->children.push_back(std::move(leaf));
      ++i;
    }
  }
  flush();
  return group;
}

inline std::unique_ptr<SyntaxNode> parse_syntax_tree(
    const std::vector<std::string>& toks) {
  std::size_t i = 0;
  return parse_group(toks, i, 'r', "");
}

inline std::uint64_t collect_subtree_hashes(
    const SyntaxNode& node, std::unordered_map<std::uint64_t, long long>& out) {
  std::string material(1, node.kind);
  material += node.token;
  for (const auto& child : node.children) {
    std::uint64_t h = collect_subtree_hashes(*child, out);
    material += '\x1f';
    material += std::to_string(h);
  }
  std::uint64_t hash = fnv1a64(material);
  if (!node.children.empty()) ++out[hash];
  return hash;
}

// matched reference subtrees / total reference subtrees; nullopt when the
// reference has none
inline std::optional<double> syntax_match(const std::vector<std::string>& cand,
                                          const std::vector<std::string>& ref) {
  std::unordered_map<std::uint64_t, long long> cand_sub, ref_sub;
  collect_subtree_hashes(*parse_syntax_tree(cand), cand_sub);
  collect_subtree_hashes(*parse_syntax_tree(ref), ref_sub);
  long long total = 0, matched = 0;
  for (const auto& [h, cnt] : ref_sub) {
    total += cnt;
    auto it = cand_sub.find(h);
    if (it != cand_sub.end()) matched += std::min(cnt, it->second);
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(matched) / static_cast<double>(total);
}

// --- dataflow match: last definition reaches use ----------------------------
//
// A def is an identifier directly assigned ('=' or compound assignment); any
// other identifier occurrence that is not a call name or keyword is a use.
// Each use pairs with the ordinal of the reaching definition of its name
// (-1 when it reads an undefined name).

inline std::unordered_map<std::string, long long> def_use_pairs(
    const std::vector<std::string>& toks,
    const std::unordered_set<std::string>& keywords) {
  static const std::unordered_set<std::string> kCompound = {
      "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="};
  auto is_identifier = [](const std::string& t) {
    return !t.empty() &&
           (std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_' ||
            t[0] == '$');
  };
  std::unordered_map<std::string, int> def_ordinal;
  std::unordered_map<std::string, long long> pairs;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string& t = toks[i];
    if (!is_identifier(t) || keywords.count(t)) continue;
    const std::string* next = (i + 1 < toks.size()) ? &toks[i + 1] : nullptr;
    if (next && *next == "(") continue;  // call or declaration name
    bool is_def = next && (*next == "=" || kCompound.count(*next));
    bool is_use = !next || *next != "=";
    if (is_use) {
      auto it = def_ordinal.find(t);
      int ord = (it == def_ordinal.end()) ? -1 : it->second - 1;
      ++pairs[t + '#' + std::to_string(ord)];
    }
    if (is_def) ++def_ordinal[t];
  }
  return pairs;
}

inline std::optional<double> dataflow_match(
    const std::vector<std::string>& cand, const std::vector<std::string>& ref,
    const std::unordered_set<std::string>& keywords) {
  auto ref_pairs = def_use_pairs(ref, keywords);
  if (ref_pairs.empty()) return std::nullopt;
  auto cand_pairs = def_use_pairs(cand, keywords);
  long long total = 0, matched = 0;
  for (const auto& [key, cnt] : ref_pairs) {
    total += cnt;
    auto it = cand_pairs.find(key);
    if (it != cand_pairs.end()) matched += std::min(cnt, it->second);
  }
  return static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace detail

// CodeBLEU: 0.25 each of n-gram BLEU, keyword-weighted BLEU, syntax subtree
// match, and def-use dataflow match. A component whose reference side is
// empty is dropped and its weight spread uniformly over the rest.
inline CodeBleuResult compute_codebleu(const std::string& candidate_text,
                                       const std::string& reference_text,
                                       const std::string& language_hint = "") {
  std::vector<std::string> cand = tokenize_code(candidate_text, language_hint);
  std::vector<std::string> ref = tokenize_code(reference_text, language_hint);
  if (ref.empty()) {
    throw Error(ErrorKind::empty_reference, "CodeBLEU needs a non-empty reference");
  }
  const auto& keywords = language_keywords(language_hint);

  CodeBleuResult result;
  result.ngram = compute_bleu(cand, ref);
  result.weighted_ngram = detail::weighted_bleu(cand, ref, keywords);
  result.syntax = detail::syntax_match(cand, ref);
  result.dataflow = detail::dataflow_match(cand, ref, keywords);

  double sum = result.ngram + result.weighted_ngram;
  int present = 2;
  if (result.syntax) {
    sum += *result.syntax;
    ++present;
  }
  if (result.dataflow) {
    sum += *result.dataflow;
    ++present;
  }
  result.score = sum / present;
  return result;
}

}  // namespace rtt
