#pragma once

#include <stdexcept>
#include <string>

namespace rtt {

enum class ErrorKind {
  config,
  parse,
  invariant,
  unknown_token,
  missing_context,
  enumeration_bound,
  backend_unreachable,
  context_overflow,
  malformed_response,
  empty_reference,
  empty_corpus,
  degenerate_variance,
  bug_set_mismatch,
  io,
  span_mismatch,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::unknown_token: return "unknown-token";
    case ErrorKind::missing_context: return "missing-context";
    case ErrorKind::enumeration_bound: return "enumeration-bound-exceeded";
    case ErrorKind::backend_unreachable: return "backend-unreachable";
    case ErrorKind::context_overflow: return "context-overflow";
    case ErrorKind::malformed_response: return "malformed-response";
    case ErrorKind::empty_reference: return "empty-reference";
    case ErrorKind::empty_corpus: return "empty-corpus";
    case ErrorKind::degenerate_variance: return "degenerate-variance";
    case ErrorKind::bug_set_mismatch: return "bug-set-mismatch";
    case ErrorKind::io: return "io-error";
    case ErrorKind::span_mismatch: return "span-mismatch";
  }
  return "unknown";
}

}  // namespace rtt
