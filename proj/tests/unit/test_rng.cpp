#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "drsim/rational.hpp"
#include "drsim/rng.hpp"

using namespace drsim;

TEST(Seeds, DerivationIsStableAndSpread) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_EQ(label_tag("input"), label_tag("input"));
  EXPECT_NE(label_tag("input"), label_tag("inpuT"));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 50; ++m) {
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(derive_seed(m, t));
  }
  EXPECT_EQ(seen.size(), 2500u);
  std::set<std::uint64_t> peers;
  for (int p = 1; p <= 100; ++p) peers.insert(peer_seed(9, p));
  peers.insert(adversary_seed(9));
  EXPECT_EQ(peers.size(), 101u);
}

TEST(Stream, SameSeedSameWords) {
  Stream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs = differs || x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Stream, BelowAndBetweenStayInRange) {
  Stream s(5);
  std::vector<int> hist(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
    const auto w = s.between(-3, 3);
    ASSERT_GE(w, -3);
    ASSERT_LE(w, 3);
    const double u = s.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi = 0;
  for (int c : hist) chi += std::pow(c - draws / 7.0, 2) / (draws / 7.0);
  EXPECT_LT(chi, 22.46);
}

TEST(Stream, TapeReplaysExactly) {
  std::vector<std::uint64_t> tape;
  Stream s(77);
  s.record_to(&tape);
  StreamSource live(s);
  std::vector<std::uint64_t> draws;
  for (int i = 0; i < 20; ++i) draws.push_back(below_from(live, 1000));
  s.record_to(nullptr);
  TapeSource replay(tape);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(below_from(replay, 1000), draws[static_cast<std::size_t>(i)]);
  EXPECT_EQ(replay.consumed(), tape.size());
  EXPECT_THROW(replay.next(), std::runtime_error);
}

TEST(Binomial, MeanMatchesWhenTrialsEqualInverseP) {
  // 2^j trials with p = 2^-j: one head expected.
  Stream s(2024);
  StreamSource src(s);
  const int samples = 100000;
  const std::uint64_t trials = 32;
  const long double p = 1.0L / 32;
  double sum = 0;
  for (int i = 0; i < samples; ++i) sum += static_cast<double>(sample_binomial(src, trials, p));
  const double mean = sum / samples;
  const double sigma = std::sqrt(static_cast<double>(trials * p * (1 - p)) / samples);
  EXPECT_NEAR(mean, 1.0, 3 * sigma);
}

TEST(Binomial, EdgeProbabilities) {
  std::vector<std::uint64_t> tape;  // no draws allowed
  TapeSource none(tape);
  EXPECT_EQ(sample_binomial(none, 10, 0.0L), 0u);
  EXPECT_EQ(sample_binomial(none, 10, 1.0L), 10u);
  EXPECT_EQ(sample_binomial(none, 0, 0.5L), 0u);
  std::vector<std::uint64_t> zero = {0};
  TapeSource low(zero);
  EXPECT_EQ(sample_binomial(low, 32, 1.0L / 128), 0u);
  std::vector<std::uint64_t> high = {~std::uint64_t{0}};
  TapeSource top(high);
  EXPECT_GT(sample_binomial(top, 32, 1.0L / 128), 0u);
}

TEST(Rational, Parsing) {
  EXPECT_EQ(parse_rational("1/4"), Rational(1, 4));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("-0.5"), Rational(-1, 2));
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_EQ(rational_from_double(0.25), Rational(1, 4));
  EXPECT_EQ(rational_from_double(1.0 / 3.0), Rational(1, 3));
  EXPECT_EQ(to_string(Rational(6, 4)), "3/2");
  EXPECT_EQ(to_string(Rational(4, 2)), "2");
}

TEST(Rational, FloorAndCeil) {
  EXPECT_EQ(floor_of(Rational(7, 2)), 3);
  EXPECT_EQ(ceil_of(Rational(7, 2)), 4);
  EXPECT_EQ(floor_of(Rational(-7, 2)), -4);
  EXPECT_EQ(ceil_of(Rational(-7, 2)), -3);
  EXPECT_EQ(floor_of(Rational(4)), 4);
  EXPECT_EQ(ceil_of(Rational(4)), 4);
}
