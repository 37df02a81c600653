#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "omega/heuristic.hpp"
#include "omega/submodules.hpp"
#include "oracles.hpp"

using namespace omega;

namespace {

const PrimeParam p3{3};

ModuleVector mv(PrimeParam p, int n, std::initializer_list<std::int64_t> f, std::initializer_list<std::int64_t> g) {
  return {TruncatedSeries(p, n, f), TruncatedSeries(p, n, g)};
}

std::vector<CyclicSubmodule> collect(PrimeParam p, int n) {
  std::vector<CyclicSubmodule> out;
  for (const auto& m : enumerate_maximal(p, n)) out.push_back(m);
  return out;
}

std::vector<ModuleVector> all_maximal_vectors(PrimeParam p, int n) {
  std::vector<ModuleVector> out;
  const auto all = oracle::all_series(p.value(), static_cast<std::size_t>(n));
  for (const auto& f : all) {
    for (const auto& g : all) {
      ModuleVector v(TruncatedSeries(p, n, f), TruncatedSeries(p, n, g));
      if (is_maximal(v)) out.push_back(v);
    }
  }
  return out;
}

TEST(IsMaximal, Examples) {
  EXPECT_TRUE(is_maximal(mv(p3, 2, {1}, {0})));
  EXPECT_FALSE(is_maximal(mv(p3, 2, {0, 1}, {0, 1})));
  EXPECT_TRUE(is_maximal(mv(p3, 2, {2}, {1, 1})));
}

TEST(CanonicalForm, Examples) {
  const auto a = canonical_form(mv(p3, 2, {2}, {1, 1}));
  EXPECT_EQ(a, CyclicSubmodule::type_a(TruncatedSeries(p3, 2, {2, 2})));
  EXPECT_EQ(oracle::generated_set(a.generator()), oracle::generated_set(mv(p3, 2, {2}, {1, 1})));

  const auto g = TruncatedSeries(p3, 2, {1, 2});
  EXPECT_EQ(canonical_form(ModuleVector(TruncatedSeries::one(p3, 2), g)), CyclicSubmodule::type_a(g));

  const auto b = canonical_form(mv(p3, 2, {0, 1}, {2}));
  const std::vector<residue> h{2};
  EXPECT_EQ(b, CyclicSubmodule::type_b(p3, 2, h));
  EXPECT_EQ(b.type_b_parameter(), h);
  EXPECT_EQ(oracle::generated_set(b.generator()), oracle::generated_set(mv(p3, 2, {0, 1}, {2})));

  EXPECT_THROW((void)canonical_form(mv(p3, 2, {0, 1}, {0, 2})), domain_error);
}

TEST(CanonicalForm, SoundnessExhaustive) {
  for (int n = 1; n <= 2; ++n) {
    for (const auto& v : all_maximal_vectors(p3, n)) {
      const auto c = canonical_form(v);
      ASSERT_EQ(oracle::generated_set(c.generator()), oracle::generated_set(v)) << to_string(c);
    }
  }
}

TEST(CanonicalForm, SoundnessSampled) {
  std::mt19937_64 rng(31);
  for (auto [q, n] : {std::pair{3u, 3}, {5u, 2}, {5u, 3}, {7u, 2}}) {
    const PrimeParam p(q);
    for (int s = 0; s < 100; ++s) {
      auto f = oracle::random_series(p, n, rng);
      auto g = oracle::random_series(p, n, rng);
      if (s % 2 == 0) f = f.shifted_up(1);  // exercise type B
      ModuleVector v(f, g);
      if (!is_maximal(v)) continue;
      ASSERT_EQ(oracle::generated_set(canonical_form(v).generator()), oracle::generated_set(v));
    }
  }
}

TEST(CanonicalForm, UniqueAcrossGenerators) {
  // Each canonical module is hit by exactly |Omega_n^x| = (p-1)p^{n-1} generators.
  for (auto [q, n] : {std::pair{3u, 1}, {3u, 2}, {5u, 1}, {5u, 2}}) {
    const PrimeParam p(q);
    std::map<std::uint64_t, std::uint64_t> hits;
    for (const auto& v : all_maximal_vectors(p, n)) ++hits[index_of(canonical_form(v))];
    ASSERT_EQ(hits.size(), count_maximal(p, n));
    const std::uint64_t units = (q - 1) * detail::checked_pow(q, n - 1, "units");
    for (const auto& [index, k] : hits) ASSERT_EQ(k, units);
  }
}

TEST(Counting, ReferenceValues) {
  EXPECT_EQ(count_maximal(p3, 1), 4u);
  EXPECT_EQ(count_maximal(p3, 2), 12u);
  EXPECT_EQ(count_maximal(PrimeParam{5}, 2), 30u);
  EXPECT_EQ(count_maximal_generators(p3, 1), 8u);
  EXPECT_EQ(count_maximal_generators(p3, 2), 72u);
  EXPECT_EQ(count_maximal_generators(PrimeParam{5}, 1), 24u);
}

TEST(Counting, EnumerationMatchesFormulaAndIsDistinct) {
  for (unsigned q : {3u, 5u, 7u, 11u}) {
    const PrimeParam p(q);
    for (int n = 1; n <= 4; ++n) {
      const std::uint64_t expected = detail::checked_pow(q, n - 1, "t") * (q + 1);
      if (expected > 20000) continue;
      std::set<std::pair<FormType, std::vector<residue>>> seen;
      std::uint64_t k = 0;
      for (const auto& m : enumerate_maximal(p, n)) {
        ASSERT_EQ(index_of(m), k);
        ASSERT_EQ(nth_maximal(p, n, k), m);
        ++k;
        seen.emplace(m.type(), std::vector<residue>(m.parameter().coeffs().begin(), m.parameter().coeffs().end()));
      }
      ASSERT_EQ(k, expected);
      ASSERT_EQ(seen.size(), expected);
      ASSERT_EQ(count_maximal(p, n), expected);
    }
  }
}

TEST(Counting, GeneratorCensus) {
  for (auto [q, n] : {std::pair{3u, 1}, {3u, 2}, {5u, 1}}) {
    const PrimeParam p(q);
    ASSERT_EQ(all_maximal_vectors(p, n).size(), count_maximal_generators(p, n));
  }
}

TEST(Counting, Bounds) {
  EXPECT_THROW((void)count_maximal(PrimeParam{97}, 12), resource_error);
  EXPECT_THROW((void)count_maximal(p3, 13), resource_error);
  EXPECT_THROW((void)count_maximal(p3, 0), precondition_error);
  EXPECT_NO_THROW((void)count_maximal(PrimeParam{97}, 9));
}

TEST(Intersect, Examples) {
  const auto n1 = CyclicSubmodule::type_a(TruncatedSeries(p3, 2, {0}));
  const auto n2 = CyclicSubmodule::type_a(TruncatedSeries(p3, 2, {0, 1}));
  EXPECT_EQ(intersect(n1, n1).size_exponent, 2);
  EXPECT_EQ(intersect(n1, n2).size_exponent, 1);
  EXPECT_EQ(oracle::intersection_size(oracle::generated_set(n1.generator()), oracle::generated_set(n2.generator())), 3u);
  EXPECT_EQ(sum_and_quotient(n1, n2).quotient_size_exponent, 1);
  const auto q = sum_and_quotient(n1, n1);
  EXPECT_EQ(q.quotient_size_exponent, 2);
  EXPECT_EQ(q.cyclic_structure, std::vector<int>{2});
  for (const auto& a : enumerate_maximal(p3, 1)) {
    for (const auto& b : enumerate_maximal(p3, 1)) {
      if (a == b) continue;
      EXPECT_EQ(intersect(a, b).size_exponent, 0);
      EXPECT_EQ(sum_and_quotient(a, b).quotient_size_exponent, 0);
    }
  }
  EXPECT_THROW((void)intersect(n1, CyclicSubmodule::type_a(TruncatedSeries(p3, 3))), structural_error);
}

TEST(Intersect, AgainstBruteForceSets) {
  for (auto [q, n] : {std::pair{3u, 1}, {3u, 2}, {3u, 3}, {5u, 2}}) {
    const PrimeParam p(q);
    const auto all = collect(p, n);
    std::vector<std::set<oracle::Pair>> sets;
    for (const auto& m : all) sets.push_back(oracle::generated_set(m.generator()));
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = 0; j < all.size(); ++j) {
        const auto cap = intersect(all[i], all[j]);
        const auto size = oracle::intersection_size(sets[i], sets[j]);
        ASSERT_EQ(oracle::log_p(size, q), cap.size_exponent);
        ASSERT_EQ(cap.generator.has_value(), cap.size_exponent > 0);
        if (cap.generator) {
          // The generator lies in both and generates the whole intersection.
          const auto gen = oracle::generated_set(*cap.generator);
          ASSERT_EQ(gen.size(), size);
          ASSERT_EQ(oracle::intersection_size(gen, sets[i]), size);
          ASSERT_EQ(oracle::intersection_size(gen, sets[j]), size);
        }
        const auto la = intersect_by_linear_algebra(all[i], all[j]);
        ASSERT_EQ(la.size_exponent, cap.size_exponent);
      }
    }
  }
}

TEST(SumAndQuotient, AgainstBruteForceCosets) {
  for (auto [q, n] : {std::pair{3u, 1}, {3u, 2}, {5u, 1}}) {
    const PrimeParam p(q);
    const auto all = collect(p, n);
    const std::uint64_t ambient = detail::checked_pow(q, 2 * n, "ambient");
    for (const auto& a : all) {
      const auto sa = oracle::generated_set(a.generator());
      for (const auto& b : all) {
        const auto sum = oracle::sum_size(sa, oracle::generated_set(b.generator()), q);
        const auto res = sum_and_quotient(a, b);
        ASSERT_EQ(oracle::log_p(ambient / sum, q), res.quotient_size_exponent);
        int total = 0;
        for (int k : res.cyclic_structure) total += k;
        ASSERT_EQ(total, res.quotient_size_exponent);
      }
    }
  }
}

TEST(SumAndQuotient, DualityAllPairs) {
  // intersect's exponent equals the quotient exponent on all 144 pairs at (3, 2),
  // and more broadly wherever full enumeration is cheap.
  for (auto [q, n] : {std::pair{3u, 2}, {3u, 3}, {5u, 2}}) {
    const PrimeParam p(q);
    std::size_t pairs = 0;
    for (const auto& a : enumerate_maximal(p, n)) {
      for (const auto& b : enumerate_maximal(p, n)) {
        const auto res = sum_and_quotient(a, b);
        ASSERT_EQ(intersect(a, b).size_exponent, res.quotient_size_exponent);
        // Omega_n^2/(N1+N2) is cyclic: one factor of length v, or none.
        if (res.quotient_size_exponent > 0) {
          ASSERT_EQ(res.cyclic_structure, std::vector<int>{res.quotient_size_exponent});
        } else {
          ASSERT_TRUE(res.cyclic_structure.empty());
        }
        ++pairs;
      }
    }
    if (q == 3 && n == 2) {
      EXPECT_EQ(pairs, 144u);
    }
  }
}

TEST(Projection, ExamplesAndErrors) {
  const auto n = nth_maximal(p3, 3, 17);
  EXPECT_EQ(project(n, 3), n);
  EXPECT_THROW((void)project(n, 4), precondition_error);
  EXPECT_THROW((void)project(n, 0), precondition_error);
  EXPECT_THROW((void)lifts(n, 2), precondition_error);
  for (const auto& m : enumerate_maximal(p3, 3)) {
    EXPECT_EQ(project(m, 1).type(), m.type());
    EXPECT_EQ(project(m, 2).type(), m.type());
  }
}

TEST(Projection, TypeALiftsAreAddedTopCoefficient) {
  const auto g = TruncatedSeries(p3, 2, {1, 2});
  const auto base = CyclicSubmodule::type_a(g);
  std::set<std::vector<residue>> got;
  for (const auto& l : lifts(base, 3)) {
    ASSERT_EQ(l.type(), FormType::A);
    got.emplace(l.parameter().coeffs().begin(), l.parameter().coeffs().end());
  }
  std::set<std::vector<residue>> expected;
  for (residue c = 0; c < 3; ++c) expected.insert({1, 2, c});
  EXPECT_EQ(got, expected);
}

TEST(Projection, FibersPartitionEnumeration) {
  for (auto [n, m] : {std::pair{1, 2}, {1, 3}, {2, 3}, {2, 2}, {1, 4}}) {
    std::map<std::uint64_t, std::uint64_t> fiber;
    for (const auto& up : enumerate_maximal(p3, m)) ++fiber[index_of(project(up, n))];
    const std::uint64_t expected = detail::checked_pow(3, m - n, "fiber");
    ASSERT_EQ(fiber.size(), count_maximal(p3, n));
    for (const auto& [k, size] : fiber) ASSERT_EQ(size, expected);
    for (const auto& down : enumerate_maximal(p3, n)) {
      std::uint64_t count = 0;
      for (const auto& l : lifts(down, m)) {
        ASSERT_EQ(project(l, n), down);
        ++count;
      }
      ASSERT_EQ(count, expected);
    }
  }
}

TEST(Tower, CompatibilityIsEnforced) {
  const auto top = nth_maximal(p3, 4, 50);
  const auto tower = SubmoduleTower::from_top(top, {1, 2, 4});
  EXPECT_EQ(tower.top(), top);
  EXPECT_EQ(tower.at_level(2), project(top, 2));
  EXPECT_THROW((void)tower.at_level(3), precondition_error);
  const auto other = nth_maximal(p3, 2, 0) == project(top, 2) ? nth_maximal(p3, 2, 1) : nth_maximal(p3, 2, 0);
  EXPECT_THROW((SubmoduleTower({1, 2, 4}, {project(top, 1), other, top})), domain_error);
}

TEST(Tower, StabilizationExample) {
  // Constant towers <(1,0)> and <(1,T)>: v = 1 from level 2 onward.
  const auto a = CyclicSubmodule::type_a(TruncatedSeries(p3, 4));
  const auto b = CyclicSubmodule::type_a(TruncatedSeries::t_power(p3, 4, 1));
  const auto o = analyze_tower_pair(a, b);
  EXPECT_FALSE(o.equal);
  EXPECT_EQ(o.exponents, (std::vector<int>{1, 1, 1, 1}));
  EXPECT_EQ(o.top_exponent, 1);
  EXPECT_EQ(o.stabilization_level, 2);
  EXPECT_TRUE(o.consistent);
  for (int level = 2; level <= 4; ++level) {
    const auto sa = oracle::generated_set(project(a, level).generator());
    const auto sb = oracle::generated_set(project(b, level).generator());
    EXPECT_EQ(oracle::intersection_size(sa, sb), 3u);
  }
  const auto same = analyze_tower_pair(a, a);
  EXPECT_EQ(same.exponents, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_TRUE(same.consistent);
}

}  // namespace
