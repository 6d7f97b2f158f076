#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace rtt {

// Shared code lexer for the n-gram metrics. Not a parser: it only has to be
// deterministic, total, and stable across candidate/reference pairs.
//
// Tokens: identifiers, numeric literals, string/char literals, maximal-munch
// operators, single punctuation. Comments (// and /* */) and whitespace are
// dropped. Anything unrecognized becomes a single-char token.
inline std::vector<std::string> tokenize_code(std::string_view text,
                                              std::string_view language_hint = "") {
  (void)language_hint;  // lexing rules are language-neutral
  static constexpr std::array<std::string_view, 36> kOperators = {
      ">>>=", "<<=", ">>=", ">>>", "...", "<<", ">>", "<=", ">=", "==",
      "!=",   "&&",  "||",  "++",  "--",  "+=", "-=", "*=", "/=", "%=",
      "&=",   "|=",  "^=",  "->",  "::",  "=",  "+",  "-",  "*",  "/",
      "%",    "<",   ">",   "!",   "&",   "|"};

  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto is_ident_start = [](unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$';
  };
  auto is_ident = [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '$';
  };

  while (i < n) {
    unsigned char c = text[i];
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    // comments
    if (c == '/' && i + 1 < n && text[i + 1] == '/') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(text[i] == '*' && text[i + 1] == '/')) ++i;
      i = (i + 1 < n) ? i + 2 : n;
      continue;
    }
    // string / char literals, one token each, backslash escapes honored
    if (c == '"' || c == '\'') {
      std::size_t start = i;
      char quote = static_cast<char>(c);
      ++i;
      while (i < n && text[i] != quote) {
        if (text[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i < n) ++i;  // closing quote
      tokens.emplace_back(text.substr(start, i - start));
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t start = i;
      while (i < n && is_ident(text[i])) ++i;
      tokens.emplace_back(text.substr(start, i - start));
      continue;
    }
    if (std::isdigit(c)) {
      // covers ints, decimals, hex, exponents, and type suffixes well enough
      std::size_t start = i;
      while (i < n) {
        unsigned char d = text[i];
        if (std::isalnum(d) || d == '.') {
          ++i;
        } else if ((d == '+' || d == '-') && i > start &&
                   (text[i - 1] == 'e' || text[i - 1] == 'E')) {
          ++i;
        } else {
          break;
        }
      }
      tokens.emplace_back(text.substr(start, i - start));
      continue;
    }
    bool matched = false;
    for (std::string_view op : kOperators) {
      if (text.substr(i, op.size()) == op) {
        tokens.emplace_back(op);
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    // punctuation and unknown characters alike: single-char token
    tokens.emplace_back(1, static_cast<char>(c));
    ++i;
  }
  return tokens;
}

// Keyword table used by the weighted n-gram component. The hint picks a
// language family; unknown hints fall back to the Java/C set.
inline const std::unordered_set<std::string>& language_keywords(
    std::string_view language_hint) {
  static const std::unordered_set<std::string> kJavaLike = {
      "abstract", "assert",   "boolean",  "break",      "byte",    "case",
      "catch",    "char",     "class",    "const",      "continue", "default",
      "do",       "double",   "else",     "enum",       "extends", "final",
      "finally",  "float",    "for",      "goto",       "if",      "implements",
      "import",   "instanceof", "int",    "interface",  "long",    "native",
      "new",      "package",  "private",  "protected",  "public",  "return",
      "short",    "static",   "strictfp", "super",      "switch",
      "synchronized", "this", "throw",    "throws",     "transient", "try",
      "void",     "volatile", "while",    "true",       "false",   "null"};
  static const std::unordered_set<std::string> kPython = {
      "False", "None",  "True",  "and",    "as",     "assert", "async",
      "await", "break", "class", "continue", "def",  "del",    "elif",
      "else",  "except", "finally", "for",  "from",  "global", "if",
      "import", "in",   "is",    "lambda", "nonlocal", "not",  "or",
      "pass",  "raise", "return", "try",   "while",  "with",   "yield"};
  static const std::unordered_set<std::string> kMinilang = {
      "fn", "if", "else", "while", "return", "read", "print"};
  if (language_hint == "python") return kPython;
  if (language_hint == "minilang") return kMinilang;
  return kJavaLike;
}

}  // namespace rtt
