#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "cxrseg/csv.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"

using namespace cxrseg;

TEST(CounterRng, ReplaysFromSeedAndStream) {
  CounterRng a(42, 7);
  CounterRng b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  CounterRng c(42, 8);
  CounterRng d(42, 7);
  EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(CounterRng, RangesHold) {
  CounterRng r(1, 2);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = r.below(7);
    ASSERT_LT(k, 7u);
    const auto b = r.between(-3, 3);
    ASSERT_GE(b, -3);
    ASSERT_LE(b, 3);
  }
}

TEST(CounterRng, BelowIsRoughlyUniform) {
  CounterRng r(9, 9);
  std::array<int, 6> hist{};
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++hist[r.below(6)];
  for (int h : hist) EXPECT_NEAR(h, n / 6, 400);
}

TEST(CounterRng, PermutationIsAPermutation) {
  CounterRng r(3, 4);
  auto p = random_permutation(50, r);
  std::sort(p.begin(), p.end());
  std::vector<std::size_t> want(50);
  std::iota(want.begin(), want.end(), 0);
  EXPECT_EQ(p, want);
}

TEST(Csv, ParsesQuotesAndBom) {
  const auto t = csv::parse("\xEF\xBB\xBF" "a,b\n\"x,1\",\"he said \"\"hi\"\"\"\n\n2,3\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.line_numbers[1], 4u);
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_FALSE(t.column("c").has_value());
}

TEST(Csv, RejectsRaggedRows) { EXPECT_THROW(csv::parse("a,b\n1\n"), FormatError); }

TEST(Csv, RejectsUnterminatedQuote) { EXPECT_THROW(csv::parse("a\n\"x\n"), FormatError); }

TEST(Csv, EscapeRoundTrips) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "multi\nline"};
  const auto t = csv::parse("h1,h2,h3,h4\n" + csv::join_row(fields) + "\n");
  EXPECT_EQ(t.rows.at(0), fields);
}

TEST(Csv, Trim) { EXPECT_EQ(csv::trim("  a b \t"), "a b"); }

TEST(Csv, CrlfLineEndings) {
  const auto t = csv::parse("a,b\r\n\"q\",2\r\n");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "q");
  EXPECT_EQ(t.rows[0][1], "2");
}
