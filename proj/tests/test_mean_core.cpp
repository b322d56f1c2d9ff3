#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "lehmer/mean_core.hpp"
#include "oracles.hpp"

using namespace lehmer_mean;

TEST(MakeSpec, FigureOnePair) {
  const auto spec = make_spec({0.5, 2.5});
  EXPECT_EQ(spec.size(), 2u);
  EXPECT_TRUE(spec.unit_weights());
}

TEST(MakeSpec, DropsZeroValuesWithTheirWeights) {
  const auto spec = make_spec({0.0, 3.0});
  ASSERT_EQ(spec.size(), 1u);
  EXPECT_EQ(spec.values()[0], 3.0);

  const auto weighted = make_spec({2.0, 0.0, 5.0}, {1.0, 7.0, 3.0});
  ASSERT_EQ(weighted.size(), 2u);
  EXPECT_EQ(weighted.weights()[0], 1.0);
  EXPECT_EQ(weighted.weights()[1], 3.0);
}

TEST(MakeSpec, UnitWeightsMatchUnweighted) {
  const auto a = make_spec({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
  const auto b = make_spec({1.0, 2.0, 3.0});
  EXPECT_EQ(a, b);
  for (double p : {-30.0, -1.0, 0.0, 0.5, 1.0, 7.0, 120.0}) EXPECT_EQ(lehmer(a, p).value, lehmer(b, p).value);
}

TEST(MakeSpec, Errors) {
  EXPECT_THROW(make_spec({0.0, 0.0}), invalid_spec_error);
  EXPECT_THROW(make_spec(std::span<const double>{}), invalid_spec_error);
  EXPECT_THROW(make_spec({1.0, -2.0}), domain_error);
  EXPECT_THROW(make_spec({1.0, 2.0}, {1.0, 0.0}), domain_error);
  EXPECT_THROW(make_spec({1.0, 2.0}, {1.0, -1.0}), domain_error);
  EXPECT_THROW(make_spec({1.0, std::numeric_limits<double>::infinity()}), domain_error);
  EXPECT_THROW(make_spec({1.0, 2.0}, {1.0}), usage_error);
}

TEST(Lehmer, ArithmeticMeanAtOne) { EXPECT_DOUBLE_EQ(lehmer(make_spec({0.5, 2.5}), 1.0).value, 1.5); }

TEST(Lehmer, AllEqualIsConstant) {
  const auto spec = make_spec({1.7, 1.7, 1.7});
  for (double p : {-1e4, -3.0, 0.0, 2.0, 1e4}) EXPECT_DOUBLE_EQ(lehmer(spec, p).value, 1.7);
}

TEST(Lehmer, HarmonicMeanOfOneTwoThree) {
  // 3 / (1 + 1/2 + 1/3) = 18/11
  EXPECT_NEAR(lehmer(make_spec({1.0, 2.0, 3.0}), 0.0).value, 18.0 / 11.0, 1e-15);
}

TEST(Lehmer, SingleValue) {
  const auto spec = make_spec({3.0});
  EXPECT_EQ(lehmer(spec, 7.0).value, 3.0);
  EXPECT_TRUE(spec.is_constant());
}

TEST(Lehmer, RejectsNonFiniteExponent) {
  const auto spec = make_spec({1.0, 2.0});
  EXPECT_THROW(lehmer(spec, std::nan("")), domain_error);
  EXPECT_THROW(lehmer(spec, std::numeric_limits<double>::infinity()), domain_error);
}

TEST(Lehmer, MatchesDirectSummation) {
  oracle::Rng rng(11);
  for (int t = 0; t < 500; ++t) {
    const auto x = rng.values(static_cast<std::size_t>(rng.integer(1, 6)), 0.1, 10.0);
    const auto w = rng.values(x.size(), 0.1, 10.0);
    const double p = rng.uniform(-20.0, 20.0);
    const double expected = static_cast<double>(oracle::lehmer(x, p, w));
    EXPECT_NEAR(lehmer(make_spec(x, w), p).value, expected, 1e-13 * expected);
  }
}

TEST(Lehmer, ExtremeExponentsStayFiniteAndBounded) {
  // Values spanning ten orders of magnitude; raw power sums would overflow.
  const auto spec = make_spec({1e-5, 0.3, 7.0, 1e5});
  for (double p : {-1e4, -2500.0, -60.0, 60.0, 2500.0, 1e4}) {
    const double v = lehmer(spec, p).value;
    ASSERT_TRUE(std::isfinite(v)) << p;
    EXPECT_GE(v, 1e-5);
    EXPECT_LE(v, 1e5);
  }
  EXPECT_DOUBLE_EQ(lehmer(spec, 1e4).value, 1e5);
  EXPECT_DOUBLE_EQ(lehmer(spec, -1e4).value, 1e-5);
}

TEST(Asymptotes, Examples) {
  EXPECT_EQ(asymptotes(make_spec({0.5, 2.5})), std::make_pair(0.5, 2.5));
  EXPECT_EQ(asymptotes(make_spec({4.0})), std::make_pair(4.0, 4.0));
  EXPECT_EQ(asymptotes(make_spec({1.0, 2.0, 3.0})), std::make_pair(1.0, 3.0));
}

TEST(Asymptotes, Convergence) {
  const auto spec = make_spec({1.0, 2.0, 3.0});
  EXPECT_LE(std::abs(lehmer(spec, -64.0).value - 1.0), 1e-6);
  EXPECT_LE(std::abs(lehmer(spec, 64.0).value - 3.0), 1e-6);
}

TEST(Properties, MonotoneAndBounded) {
  oracle::Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const auto x = rng.values(static_cast<std::size_t>(rng.integer(2, 6)), 0.1, 10.0);
    const auto spec = make_spec(x);
    double p = rng.uniform(-40.0, 40.0), s = rng.uniform(-40.0, 40.0);
    if (p > s) std::swap(p, s);
    const double lp = lehmer(spec, p).value, ls = lehmer(spec, s).value;
    ASSERT_LE(lp, ls * (1 + 4e-16)) << p << " " << s;
    ASSERT_GE(lp, spec.min_value());
    ASSERT_LE(ls, spec.max_value());
    // strict on the unsaturated part of the curve
    if (s - p > 0.5 && s < 5.0 && p > -5.0 && !spec.is_constant()) {
      ASSERT_LT(lp, ls);
    }
  }
}

TEST(Properties, Homogeneity) {
  oracle::Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const auto x = rng.values(static_cast<std::size_t>(rng.integer(1, 6)), 0.1, 10.0);
    const auto w = rng.values(x.size(), 0.1, 10.0);
    const auto spec = make_spec(x, w);
    const double c = rng.log_uniform(1e-3, 1e3), p = rng.uniform(-20.0, 20.0);
    const double expected = c * lehmer(spec, p).value;
    ASSERT_NEAR(lehmer(scale(spec, c), p).value, expected, 1e-12 * expected);
  }
  EXPECT_THROW(scale(make_spec({1.0}), 0.0), domain_error);
}

TEST(Properties, ArithmeticAndHarmonicMeans) {
  oracle::Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    const auto x = rng.values(static_cast<std::size_t>(rng.integer(1, 6)), 0.1, 10.0);
    const auto w = rng.values(x.size(), 0.1, 10.0);
    double sw = 0, swx = 0, swinv = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sw += w[i];
      swx += w[i] * x[i];
      swinv += w[i] / x[i];
    }
    const auto spec = make_spec(x, w);
    ASSERT_NEAR(lehmer(spec, 1.0).value, swx / sw, 1e-12 * swx / sw);
    ASSERT_NEAR(lehmer(spec, 0.0).value, sw / swinv, 1e-12 * sw / swinv);
  }
}

TEST(Normalize, MergesDuplicatesWithoutChangingTheMean) {
  const auto spec = make_spec({2.0, 1.0, 2.0, 3.0});
  const auto merged = normalize(spec);
  ASSERT_EQ(merged.size(), 3u);
  EXPECT_EQ(merged.weights()[1], 2.0);
  for (double p : {-5.0, 0.0, 1.0, 3.5}) EXPECT_NEAR(lehmer(merged, p).value, lehmer(spec, p).value, 1e-14);
}
