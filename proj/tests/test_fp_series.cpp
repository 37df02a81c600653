#include <gtest/gtest.h>

#include <random>

#include "omega/fp_series.hpp"
#include "oracles.hpp"

using omega::PrimeParam;
using omega::TruncatedSeries;

namespace {

const PrimeParam p3{3};

struct GridPoint {
  unsigned p;
  int n;
};

std::vector<GridPoint> grid() {
  std::vector<GridPoint> out;
  for (unsigned p : {3u, 5u, 7u, 97u}) {
    for (int n : {1, 2, 3, 5, 9, 12}) out.push_back({p, n});
  }
  return out;
}

TEST(PrimeParam, Validation) {
  EXPECT_NO_THROW(PrimeParam{3});
  EXPECT_NO_THROW(PrimeParam{97});
  EXPECT_THROW(PrimeParam{2}, omega::precondition_error);
  EXPECT_THROW(PrimeParam{9}, omega::precondition_error);
  EXPECT_THROW(PrimeParam{101}, omega::precondition_error);
  EXPECT_THROW(PrimeParam{1}, omega::precondition_error);
}

TEST(TruncatedSeries, ExamplesRingOps) {
  EXPECT_TRUE((TruncatedSeries(p3, 2, {1, 2}) + TruncatedSeries(p3, 2, {2, 1})).is_zero());
  const auto t = TruncatedSeries::t_power(p3, 2, 1);
  EXPECT_TRUE((t * t).is_zero());
  // (1+T)(1+2T+T^2) = 1 + 3T + 3T^2 + T^3 -> 1 mod (3, T^3).
  const auto prod = TruncatedSeries(p3, 3, {1, 1}) * TruncatedSeries(p3, 3, {1, 2, 1});
  EXPECT_EQ(oracle::to_vec(prod), oracle::mul({1, 1, 0}, {1, 2, 1}, 3));
  EXPECT_EQ(prod, TruncatedSeries::one(p3, 3));
}

TEST(TruncatedSeries, MismatchIsStructuralError) {
  EXPECT_THROW((void)(TruncatedSeries(p3, 2) + TruncatedSeries(p3, 3)), omega::structural_error);
  EXPECT_THROW((void)(TruncatedSeries(p3, 2) * TruncatedSeries(PrimeParam{5}, 2)), omega::structural_error);
}

TEST(TruncatedSeries, CanonicalCoefficients) {
  const TruncatedSeries x(p3, 3, {-1, 7, 3});
  EXPECT_EQ(oracle::to_vec(x), (oracle::Vec{2, 1, 0}));
  EXPECT_EQ(x, TruncatedSeries(p3, 3, {2, 1, 0}));
  EXPECT_NE(x, TruncatedSeries(p3, 4, {2, 1, 0}));
}

TEST(TruncatedSeries, ValuationExamples) {
  EXPECT_EQ(TruncatedSeries(p3, 4).valuation(), 4);
  EXPECT_EQ(TruncatedSeries(p3, 4, {1, 1}).valuation(), 0);
  EXPECT_EQ(TruncatedSeries(p3, 4, {0, 0, 2, 1}).valuation(), 2);
}

TEST(TruncatedSeries, RingAxiomsOnRandomTriples) {
  std::mt19937_64 rng(20240601);
  for (const auto& g : grid()) {
    const PrimeParam p(g.p);
    for (int s = 0; s < 1000; ++s) {
      const auto x = oracle::random_series(p, g.n, rng);
      const auto y = oracle::random_series(p, g.n, rng);
      const auto z = oracle::random_series(p, g.n, rng);
      ASSERT_EQ((x * y) * z, x * (y * z));
      ASSERT_EQ(x * (y + z), x * y + x * z);
      ASSERT_EQ(x * y, y * x);
      ASSERT_EQ((x + y) + z, x + (y + z));
      ASSERT_TRUE((x - x).is_zero());
      ASSERT_EQ(oracle::to_vec(x * y), oracle::mul(oracle::to_vec(x), oracle::to_vec(y), g.p));
    }
  }
}

TEST(TruncatedSeries, ValuationOfProduct) {
  std::mt19937_64 rng(7);
  for (const auto& g : grid()) {
    const PrimeParam p(g.p);
    for (int s = 0; s < 300; ++s) {
      // Random valuations make the truncation case common.
      auto x = oracle::random_series(p, g.n, rng).shifted_up(static_cast<int>(rng() % (g.n + 1)));
      auto y = oracle::random_series(p, g.n, rng).shifted_up(static_cast<int>(rng() % (g.n + 1)));
      ASSERT_EQ((x * y).valuation(), std::min(x.valuation() + y.valuation(), g.n));
    }
  }
}

TEST(InvertUnit, Examples) {
  EXPECT_EQ(omega::invert_unit(TruncatedSeries::one(p3, 3)), TruncatedSeries::one(p3, 3));
  EXPECT_EQ(omega::invert_unit(TruncatedSeries(p3, 3, {1, 1})), TruncatedSeries(p3, 3, {1, 2, 1}));
  EXPECT_EQ(omega::invert_unit(TruncatedSeries(p3, 2, {2})), TruncatedSeries(p3, 2, {2}));
  EXPECT_THROW((void)omega::invert_unit(TruncatedSeries(p3, 2, {0, 1})), omega::domain_error);
}

TEST(InvertUnit, ExhaustiveSmall) {
  for (int n = 1; n <= 3; ++n) {
    for (const auto& c : oracle::all_series(3, static_cast<std::size_t>(n))) {
      const TruncatedSeries x(p3, n, c);
      if (!x.is_unit()) continue;
      ASSERT_EQ(x * omega::invert_unit(x), TruncatedSeries::one(p3, n));
    }
  }
}

TEST(InvertUnit, RandomGrid) {
  std::mt19937_64 rng(11);
  for (const auto& g : grid()) {
    const PrimeParam p(g.p);
    for (int s = 0; s < 200; ++s) {
      const auto x = oracle::random_unit(p, g.n, rng);
      ASSERT_EQ(x * omega::invert_unit(x), TruncatedSeries::one(p, g.n));
    }
  }
}

TEST(Iota, Examples) {
  EXPECT_EQ(omega::iota(TruncatedSeries::one(p3, 3)), TruncatedSeries::one(p3, 3));
  const auto t = TruncatedSeries::t_power(p3, 3, 1);
  EXPECT_EQ(omega::iota(t), TruncatedSeries(p3, 3, {0, 2, 1}));
  // Independent derivation: (1+T)^{-1} - 1 via invert_unit.
  EXPECT_EQ(omega::iota(t), omega::invert_unit(TruncatedSeries::gamma(p3, 3)) - TruncatedSeries::one(p3, 3));
  EXPECT_EQ(omega::iota(omega::iota(t)), t);
}

TEST(Iota, HomomorphismAndInvolutionExhaustive) {
  const auto all = oracle::all_series(3, 3);
  for (const auto& a : all) {
    const TruncatedSeries x(p3, 3, a);
    ASSERT_EQ(omega::iota(omega::iota(x)), x);
    ASSERT_EQ(oracle::to_vec(omega::iota(x)), oracle::iota(a, 3));
    for (const auto& b : all) {
      const TruncatedSeries y(p3, 3, b);
      ASSERT_EQ(omega::iota(x * y), omega::iota(x) * omega::iota(y));
      ASSERT_EQ(omega::iota(x + y), omega::iota(x) + omega::iota(y));
    }
  }
}

TEST(Iota, RoutesAgree) {
  std::mt19937_64 rng(13);
  for (const auto& g : grid()) {
    const PrimeParam p(g.p);
    for (int s = 0; s < 50; ++s) {
      const auto x = oracle::random_series(p, g.n, rng);
      ASSERT_EQ(omega::iota(x), omega::iota_by_substitution(x));
      ASSERT_EQ(omega::iota(omega::iota(x)), x);
    }
  }
  // Power-of-p levels exercise the gamma-reversal route.
  for (unsigned q : {3u, 5u, 7u}) {
    const PrimeParam p(q);
    for (int n : {static_cast<int>(q), static_cast<int>(q * q)}) {
      for (int s = 0; s < 20; ++s) {
        const auto x = oracle::random_series(p, n, rng);
        ASSERT_EQ(omega::iota(x), omega::iota_by_substitution(x));
        ASSERT_EQ(oracle::to_vec(omega::iota(x)), oracle::iota(oracle::to_vec(x), q));
      }
    }
  }
}

TEST(GammaBasis, Examples) {
  const auto g = omega::gamma_basis(TruncatedSeries::gamma(p3, 3));
  EXPECT_EQ(g, (std::vector<omega::residue>{0, 1, 0}));
  EXPECT_EQ(omega::gamma_basis(TruncatedSeries::one(p3, 3)), (std::vector<omega::residue>{1, 0, 0}));
  EXPECT_EQ(omega::gamma_basis(TruncatedSeries::t_power(p3, 3, 2)), (std::vector<omega::residue>{1, 1, 1}));
  EXPECT_THROW((void)omega::gamma_basis(TruncatedSeries(p3, 4)), omega::precondition_error);
  EXPECT_THROW((void)omega::gamma_basis(TruncatedSeries(p3, 6)), omega::precondition_error);
}

TEST(GammaBasis, MatchesBinomialOracleAndRoundTrips) {
  std::mt19937_64 rng(17);
  for (unsigned q : {3u, 5u, 7u}) {
    const PrimeParam p(q);
    for (int n : {1, static_cast<int>(q), static_cast<int>(q * q)}) {
      for (int s = 0; s < 100; ++s) {
        const auto x = oracle::random_series(p, n, rng);
        const auto c = omega::gamma_basis(x);
        const oracle::Vec expected = oracle::gamma_coords(oracle::to_vec(x), q);
        ASSERT_EQ(oracle::Vec(c.begin(), c.end()), expected);
        ASSERT_EQ(omega::from_gamma_basis(p, c), x);
      }
    }
  }
}

TEST(GammaBasis, MultiplicationIsGroupRingConvolution) {
  std::mt19937_64 rng(19);
  for (unsigned q : {3u, 5u, 7u}) {
    const PrimeParam p(q);
    const int n = static_cast<int>(q);
    for (int s = 0; s < 200; ++s) {
      const auto x = oracle::random_series(p, n, rng);
      const auto y = oracle::random_series(p, n, rng);
      const auto cx = omega::gamma_basis(x);
      const auto cy = omega::gamma_basis(y);
      const auto cxy = omega::gamma_basis(x * y);
      ASSERT_EQ(oracle::Vec(cxy.begin(), cxy.end()),
                oracle::cyclic_convolution({cx.begin(), cx.end()}, {cy.begin(), cy.end()}, q));
    }
  }
}

}  // namespace
