#include <algorithm>

#include <gtest/gtest.h>

#include "graphcal/errors.hpp"
#include "graphcal/random.hpp"
#include "graphcal/rouge.hpp"
#include "graphcal/text.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace graphcal {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, LowercasesAndStripsEdgePunctuation) {
  EXPECT_EQ(tokenize("The Cat, sat!"), (Tokens{"the", "cat", "sat"}));
  EXPECT_EQ(tokenize("  \"quoted\"  (paren) "), (Tokens{"quoted", "paren"}));
  EXPECT_EQ(tokenize("don't stop"), (Tokens{"don't", "stop"}));
  EXPECT_EQ(tokenize("... -- !!"), Tokens{});
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Tokenize, UnicodeWhitespaceAndCase) {
  EXPECT_EQ(tokenize("Ünïcode ΣΟΦΙΑ　Москва"), (Tokens{"ünïcode", "σοφια", "москва"}));
  EXPECT_EQ(tokenize("a b"), (Tokens{"a", "b"}));
  EXPECT_EQ(tokenize("«bonjour»"), (Tokens{"bonjour"}));
}

TEST(Tokenize, MalformedUtf8IsDeterministic) {
  const std::string bad = "ab\xff\xfe cd \xc3";
  EXPECT_EQ(tokenize(bad), tokenize(bad));
  const auto tokens = tokenize(bad);
  EXPECT_NE(std::find(tokens.begin(), tokens.end(), "cd"), tokens.end());
}

TEST(RougeL, HandComputedExample) {
  // LCS 2, P = 1, R = 2/3.
  EXPECT_DOUBLE_EQ(rouge_l_f1(Tokens{"the", "cat"}, Tokens{"the", "cat", "sat"}), 0.8);
  EXPECT_EQ(rouge_l_f1(Tokens{"the", "cat"}, Tokens{"the", "cat", "sat"}), 0.8);
}

TEST(RougeL, IdenticalAndDisjoint) {
  const Tokens a{"x", "y", "z"};
  EXPECT_EQ(rouge_l_f1(a, a), 1.0);
  EXPECT_EQ(rouge_l_f1(a, Tokens{"p", "q"}), 0.0);
}

TEST(RougeL, EmptyInputIsDomainError) {
  EXPECT_THROW(rouge_l_f1(Tokens{}, Tokens{"a"}), DomainError);
  EXPECT_THROW(rouge_l_f1(Tokens{"a"}, Tokens{}), DomainError);
}

TEST(RougeL, MatchesRecursiveOracleAndIsSymmetric) {
  Rng rng(11);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto a = fixture::random_tokens(rng, 8, 4);
    const auto b = fixture::random_tokens(rng, 8, 4);
    ASSERT_EQ(lcs_length(a, b), oracle::lcs(a, b));
    ASSERT_EQ(rouge_l_f1(a, b), oracle::rouge_l(a, b));
    ASSERT_EQ(rouge_l_f1(a, b), rouge_l_f1(b, a));
    const double l = static_cast<double>(oracle::lcs(a, b));
    if (l > 0) {
      const double p = l / static_cast<double>(a.size()), r = l / static_cast<double>(b.size());
      ASSERT_NEAR(rouge_l_f1(a, b), 2 * p * r / (p + r), 1e-15);
    }
  }
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace graphcal
