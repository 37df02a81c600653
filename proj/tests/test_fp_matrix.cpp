#include <gtest/gtest.h>

#include <random>
#include <set>

#include "omega/fp_matrix.hpp"
#include "oracles.hpp"

using omega::FpMatrix;
using omega::PrimeParam;
using omega::residue;

namespace {

FpMatrix random_matrix(PrimeParam p, std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  FpMatrix m(p, 0, cols);
  for (std::size_t r = 0; r < rows; ++r) m.append_row(oracle::random_vector(p, cols, rng));
  return m;
}

/// Every vector in the row space of m, by enumerating all combinations.
std::set<std::vector<residue>> row_space(const FpMatrix& m) {
  const unsigned p = m.prime().value();
  std::set<std::vector<residue>> out;
  for (const auto& coeffs : oracle::all_series(p, m.rows())) {
    std::vector<residue> v(m.cols(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) v[c] = static_cast<residue>((v[c] + coeffs[r] * m.at(r, c)) % p);
    }
    out.insert(v);
  }
  if (m.rows() == 0) out.insert(std::vector<residue>(m.cols(), 0));
  return out;
}

TEST(FpMatrix, IdentityAndRank) {
  const PrimeParam p(5);
  EXPECT_EQ(FpMatrix::identity(p, 6).rank(), 6u);
  EXPECT_EQ(FpMatrix(p, 3, 4).rank(), 0u);
  const auto m = FpMatrix::from_rows(p, 3, {{1, 2, 3}, {2, 4, 6}, {0, 1, 1}});
  EXPECT_EQ(m.rank(), 2u);
}

TEST(FpMatrix, KernelIsExactNullSpace) {
  std::mt19937_64 rng(5);
  for (unsigned q : {3u, 5u, 7u}) {
    const PrimeParam p(q);
    for (int s = 0; s < 200; ++s) {
      const std::size_t rows = rng() % 7;
      const std::size_t cols = 1 + rng() % 7;
      const auto a = random_matrix(p, rows, cols, rng);
      const auto k = a.kernel();
      ASSERT_EQ(k.rows() + a.rank(), cols);
      for (std::size_t r = 0; r < k.rows(); ++r) {
        const auto image = a.apply(k.row(r));
        ASSERT_TRUE(std::ranges::all_of(image, [](residue c) { return c == 0; }));
      }
    }
  }
}

TEST(FpMatrix, RrefIsCanonical) {
  std::mt19937_64 rng(6);
  const PrimeParam p(7);
  for (int s = 0; s < 100; ++s) {
    const auto a = random_matrix(p, 4, 6, rng);
    // An invertible row mixing leaves the RREF unchanged.
    const auto mix = FpMatrix::from_rows(p, 4, {{1, 2, 0, 0}, {0, 1, 3, 0}, {0, 0, 1, 4}, {0, 0, 0, 5}});
    ASSERT_EQ((mix * a).rref(), a.rref());
  }
}

TEST(FpMatrix, IntersectionMatchesBruteForce) {
  std::mt19937_64 rng(8);
  const PrimeParam p(3);
  for (int s = 0; s < 200; ++s) {
    const std::size_t cols = 1 + rng() % 5;
    const auto u = random_matrix(p, rng() % 4, cols, rng);
    const auto w = random_matrix(p, rng() % 4, cols, rng);
    const auto cap = omega::intersect_row_spaces(u, w);
    const auto su = row_space(u);
    const auto sw = row_space(w);
    std::set<std::vector<residue>> expected;
    for (const auto& v : su) {
      if (sw.contains(v)) expected.insert(v);
    }
    ASSERT_EQ(row_space(cap), expected);
  }
}

TEST(FpMatrix, ReduceAgainstDetectsMembership) {
  std::mt19937_64 rng(9);
  const PrimeParam p(5);
  for (int s = 0; s < 100; ++s) {
    const auto u = random_matrix(p, 2, 4, rng).rref();
    const auto members = row_space(u);
    for (const auto& v : oracle::all_series(5, 4)) {
      std::vector<residue> x(v.begin(), v.end());
      const auto rest = omega::reduce_against(u, x);
      const bool zero = std::ranges::all_of(rest, [](residue c) { return c == 0; });
      ASSERT_EQ(zero, members.contains(x));
    }
  }
}

TEST(FpMatrix, ShapeErrors) {
  const PrimeParam p(3);
  EXPECT_THROW((void)(FpMatrix(p, 2, 3) * FpMatrix(p, 2, 3)), omega::structural_error);
  EXPECT_THROW((void)FpMatrix::from_rows(p, 2, {{1, 2, 3}}), omega::structural_error);
}

}  // namespace
