#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "rtt/error.hpp"
#include "rtt/manifest.hpp"
#include "rtt/sampling.hpp"

namespace rtt {

// Which representation the forward leg translates into.
struct IntermediateKind {
  enum class Variant { natural_language, programming_language };
  Variant variant = Variant::natural_language;
  std::string name;  // e.g. "english", "python"

  bool is_nl() const { return variant == Variant::natural_language; }
};

// Accepts "nl:english" / "pl:python".
inline IntermediateKind parse_intermediate(std::string_view text) {
  IntermediateKind kind;
  if (text.rfind("nl:", 0) == 0) {
    kind.variant = IntermediateKind::Variant::natural_language;
    kind.name = std::string(text.substr(3));
  } else if (text.rfind("pl:", 0) == 0) {
    kind.variant = IntermediateKind::Variant::programming_language;
    kind.name = std::string(text.substr(3));
  } else {
    throw Error(ErrorKind::config,
                "intermediate must be nl:<name> or pl:<name>, got '" +
                    std::string(text) + "'");
  }
  if (kind.name.empty()) {
    throw Error(ErrorKind::config, "intermediate language name is empty");
  }
  return kind;
}

struct PromptPayload {
  PromptStyle style = PromptStyle::chat;
  std::optional<std::string> system_message;
  std::string user_text;
  std::optional<std::string> infill_prefix;
  std::optional<std::string> infill_suffix;
  int approx_token_count = 0;

  // Full text a backend would see; also what token counting runs on.
  std::string rendered_text() const {
    switch (style) {
      case PromptStyle::chat:
        return (system_message ? *system_message + "\n" : "") + user_text;
      case PromptStyle::infill:
        return infill_prefix.value_or("") + infill_suffix.value_or("");
      case PromptStyle::seq2seq:
        return user_text;
    }
    return user_text;
  }

  bool operator==(const PromptPayload& other) const {
    return style == other.style && system_message == other.system_message &&
           user_text == other.user_text && infill_prefix == other.infill_prefix &&
           infill_suffix == other.infill_suffix &&
           approx_token_count == other.approx_token_count;
  }
};

inline constexpr std::string_view kChatSystemMessage =
    "You are an expert programmer in all programming languages.";

inline constexpr std::string_view kChatForwardPrefix =
    "Create a Javadoc for the Java function delimited by triple backquotes. "
    "Do not return generate the method again, return only the Javadoc. "
    "Java function: ```";

inline constexpr std::string_view kChatBackwardPrefix =
    "Given the signature of a Java function and its Javadoc delimited by triple "
    "backquotes, generate the body of the function. Do not generate any additional "
    "methods nor repeat the Javadoc nor give any explanations. Return only the "
    "completed function without any comments.```";

// Approximate token count: ceil(bytes / 4) unless the caller wires an exact
// counter. Only gates the conservative context-window skip.
inline int approx_token_count(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

// Style changes required by the model family before tokenization; today
// that is only the newline flattening some seq2seq models expect.
inline std::string preprocess_text(std::string_view code, const ModelProfile& profile) {
  if (!profile.strip_newlines) return std::string(code);
  std::string out(code);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

namespace detail {

inline void finalize(PromptPayload& payload, const ModelProfile& profile) {
  std::string rendered = payload.rendered_text();
  payload.approx_token_count = profile.token_counter
                                   ? profile.token_counter(rendered)
                                   : approx_token_count(rendered);
}

[[noreturn]] inline void unsupported(const ModelProfile& profile,
                                     const IntermediateKind& kind) {
  throw Error(ErrorKind::config,
              std::string("profile style '") + prompt_style_name(profile.style) +
                  "' does not support " + (kind.is_nl() ? "nl:" : "pl:") + kind.name +
                  " as intermediate");
}

}  // namespace detail

// Code -> intermediate. Chat and infill styles target the natural-language
// route only; seq2seq handles both.
inline PromptPayload build_forward_prompt(const BugInstance& bug,
                                          const ModelProfile& profile,
                                          const IntermediateKind& intermediate) {
  if (bug.buggy_code.empty()) {
    throw Error(ErrorKind::config, "bug '" + bug.id + "' has empty buggy_code");
  }
  std::string code = preprocess_text(bug.buggy_code, profile);
  PromptPayload payload;
  payload.style = profile.style;
  switch (profile.style) {
    case PromptStyle::chat:
      if (!intermediate.is_nl()) detail::unsupported(profile, intermediate);
      payload.system_message = std::string(kChatSystemMessage);
      payload.user_text = std::string(kChatForwardPrefix) + code + "```";
      break;
    case PromptStyle::infill:
      if (!intermediate.is_nl()) detail::unsupported(profile, intermediate);
      payload.infill_prefix = "/* @description ";
      payload.infill_suffix = "\n*/\n" + code;
      break;
    case PromptStyle::seq2seq:
      payload.user_text = code;
      break;
  }
  detail::finalize(payload, profile);
  return payload;
}

// Intermediate -> code. On the NL route the function signature from the
// original bug always follows the description, since generated summaries are
// not detailed enough to recreate it.
inline PromptPayload build_backward_prompt(const std::string& intermediate_text,
                                           const BugInstance& bug,
                                           const ModelProfile& profile,
                                           const IntermediateKind& intermediate) {
  if (intermediate_text.empty()) {
    throw Error(ErrorKind::config, "intermediate text is empty for bug '" + bug.id + "'");
  }
  PromptPayload payload;
  payload.style = profile.style;
  if (intermediate.is_nl()) {
    switch (profile.style) {
      case PromptStyle::chat:
        payload.system_message = std::string(kChatSystemMessage);
        payload.user_text = std::string(kChatBackwardPrefix) + intermediate_text + "\n" +
                            bug.function_signature + "```";
        break;
      case PromptStyle::infill: {
        std::string text;
        if (profile.file_header) text += *profile.file_header + "\n";
        text += "/* @description " + intermediate_text + "\n*/\n" + bug.function_signature;
        payload.infill_prefix = std::move(text);
        payload.infill_suffix = "";  // trailing completion: the body comes next
        break;
      }
      case PromptStyle::seq2seq:
        payload.user_text = intermediate_text + "\n" + bug.function_signature;
        break;
    }
  } else {
    if (profile.style != PromptStyle::seq2seq) detail::unsupported(profile, intermediate);
    payload.user_text = intermediate_text;
  }
  detail::finalize(payload, profile);
  return payload;
}

// True iff the prompt plus reserved generation room fits the model window;
// false routes the bug to the skip-and-mark path.
inline bool fits_context(const ModelProfile& profile, const PromptPayload& payload,
                         int reserve_output) {
  return payload.approx_token_count + reserve_output <= profile.context_window;
}

inline int default_reserve_output(const ModelProfile& profile) {
  return profile.backward_params.max_new_tokens;
}

}  // namespace rtt
