#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtt/error.hpp"

namespace rtt {

enum class PromptStyle { chat, infill, seq2seq };

inline const char* prompt_style_name(PromptStyle s) {
  switch (s) {
    case PromptStyle::chat: return "chat";
    case PromptStyle::infill: return "infill";
    case PromptStyle::seq2seq: return "seq2seq";
  }
  return "?";
}

struct SamplingParams {
  double temperature = 1.0;
  double top_p = 1.0;
  int num_beams = 1;
  int num_samples = 1;
  int max_new_tokens = 512;
  std::optional<std::uint64_t> seed;
};

inline void validate_params(const SamplingParams& p) {
  if (p.temperature < 0) throw Error(ErrorKind::config, "temperature must be >= 0");
  if (p.top_p <= 0 || p.top_p > 1) throw Error(ErrorKind::config, "top_p must be in (0,1]");
  if (p.num_beams < 1) throw Error(ErrorKind::config, "num_beams must be >= 1");
  if (p.num_samples < 1) throw Error(ErrorKind::config, "num_samples must be >= 1");
  if (p.max_new_tokens < 1) throw Error(ErrorKind::config, "max_new_tokens must be >= 1");
  if (p.num_beams > 1 && p.num_samples > p.num_beams) {
    throw Error(ErrorKind::config, "num_samples must not exceed num_beams");
  }
}

// One backend's interaction style and per-leg sampling defaults.
struct ModelProfile {
  std::string name;
  PromptStyle style = PromptStyle::chat;
  int context_window = 4096;
  SamplingParams forward_params;
  SamplingParams backward_params;
  std::vector<std::string> banned_words;
  bool seedable = false;
  std::optional<std::string> file_header;
  bool strip_newlines = false;  // seq2seq-style preprocessing
  // exact tokenizer hook; when unset, counting falls back to ceil(bytes/4)
  std::function<int(std::string_view)> token_counter;
};

inline void validate_profile(const ModelProfile& profile) {
  if (profile.name.empty()) throw Error(ErrorKind::config, "profile needs a name");
  if (profile.context_window <= 0) {
    throw Error(ErrorKind::config, "context_window must be positive");
  }
  for (const auto& w : profile.banned_words) {
    if (w.empty()) throw Error(ErrorKind::config, "banned word must be non-empty");
  }
  validate_params(profile.forward_params);
  validate_params(profile.backward_params);
}

}  // namespace rtt
