#include "rtt/lexer.hpp"

#include <gtest/gtest.h>

using rtt::tokenize_code;

namespace {

std::vector<std::string> toks(const char* text) { return tokenize_code(text); }

TEST(Lexer, SplitsPunctuation) {
  EXPECT_EQ(toks("int f ( ) { }"),
            (std::vector<std::string>{"int", "f", "(", ")", "{", "}"}));
}

TEST(Lexer, DropsLineComments) {
  EXPECT_EQ(toks("x=1; // c"), (std::vector<std::string>{"x", "=", "1", ";"}));
}

TEST(Lexer, DropsBlockComments) {
  EXPECT_EQ(toks("a /* b\nc */ d"), (std::vector<std::string>{"a", "d"}));
}

TEST(Lexer, MaximalMunchOperators) {
  EXPECT_EQ(toks(">= != &&"), (std::vector<std::string>{">=", "!=", "&&"}));
  EXPECT_EQ(toks("a>>=b"), (std::vector<std::string>{"a", ">>=", "b"}));
  EXPECT_EQ(toks("x++ + ++y"),
            (std::vector<std::string>{"x", "++", "+", "++", "y"}));
}

TEST(Lexer, StringLiteralsAreSingleTokens) {
  EXPECT_EQ(toks("s = \"a b // c\";"),
            (std::vector<std::string>{"s", "=", "\"a b // c\"", ";"}));
  EXPECT_EQ(toks("c = 'x';"), (std::vector<std::string>{"c", "=", "'x'", ";"}));
  // escaped quote stays inside the literal
  EXPECT_EQ(toks("\"a\\\"b\""), (std::vector<std::string>{"\"a\\\"b\""}));
}

TEST(Lexer, NumbersWithSuffixesAndExponents) {
  EXPECT_EQ(toks("1.5e-3 0x1F 42L"),
            (std::vector<std::string>{"1.5e-3", "0x1F", "42L"}));
}

TEST(Lexer, UnknownCharactersBecomeSingleTokens) {
  EXPECT_EQ(toks("a @ b"), (std::vector<std::string>{"a", "@", "b"}));
}

TEST(Lexer, TotalOnGarbageAndDeterministic) {
  std::string garbage = "\x01\x02 ?? \xff\xfe unterminated \" string";
  auto a = tokenize_code(garbage);
  auto b = tokenize_code(garbage);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

TEST(Lexer, EmptyInput) { EXPECT_TRUE(toks("").empty()); }

}  // namespace
