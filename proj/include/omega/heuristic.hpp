#pragma once

// The uniform model on pairs of maximal cyclic submodules of Omega_n^2:
// exact collision probabilities, the lower bound on P(N1 cap N2 = 0),
// seeded Monte-Carlo estimation, pushforward consistency of the projective
// system and tower stabilization statistics.
//
// Randomness is derived per trial from (seed, trial, substream), so results
// do not depend on the number of worker threads or their scheduling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/rational.hpp>

#include "omega/errors.hpp"
#include "omega/fp_series.hpp"
#include "omega/submodules.hpp"

namespace omega {

using Rational = boost::rational<std::int64_t>;

/// Largest |N_n| for which collision probabilities are recomputed by double enumeration.
inline constexpr std::uint64_t kMaxExhaustiveModules = 10'000;
/// Largest |N_n| for the pairwise intersection census.
inline constexpr std::uint64_t kMaxCensusModules = 2'000;

// ---------------------------------------------------------------------------
// Random streams

/// SplitMix64; a UniformRandomBitGenerator with a 64-bit state.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform integer in [0, bound) by rejection, identical on every platform.
[[nodiscard]] inline std::uint64_t uniform_below(SplitMix64& gen, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

/// Seed plus the rule deriving an independent stream for each (trial, substream).
struct RngSpec {
  std::uint64_t seed = 0;

  [[nodiscard]] SplitMix64 stream(std::uint64_t trial, std::uint64_t substream = 0) const noexcept {
    SplitMix64 mix(seed);
    std::uint64_t h = mix();
    h = SplitMix64(h ^ trial)();
    h = SplitMix64(h ^ (substream * 0xD1B54A32D192ED03ULL))();
    return SplitMix64(h);
  }

  friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// A uniformly random maximal cyclic submodule of Omega_n^2: type A with
/// probability p/(p+1), then a uniform parameter.
[[nodiscard]] inline CyclicSubmodule sample_maximal(PrimeParam p, int n, SplitMix64& gen) {
  detail::validate_module_level(n);
  const unsigned q = p.value();
  if (uniform_below(gen, q + 1) < q) {
    TruncatedSeries g(p, n);
    for (int i = 0; i < n; ++i) g.set_coeff(i, static_cast<std::int64_t>(uniform_below(gen, q)));
    return CyclicSubmodule::type_a(std::move(g));
  }
  TruncatedSeries t(p, n);
  for (int i = 1; i < n; ++i) t.set_coeff(i, static_cast<std::int64_t>(uniform_below(gen, q)));
  return CyclicSubmodule::type_b_from_first(std::move(t));
}

// ---------------------------------------------------------------------------
// Exact quantities

namespace detail {

inline std::int64_t to_signed(std::uint64_t v, const char* what) {
  if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw resource_error(std::string(what) + " does not fit a 64-bit rational");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

/// Counts describing the uniform law on pairs at level n.
struct ProbabilityModel {
  unsigned p = 0;
  int level = 0;
  std::uint64_t total_pairs = 0;
  std::uint64_t collision_pairs = 0;
  Rational collision_probability;
};

[[nodiscard]] inline ProbabilityModel probability_model(PrimeParam p, int n) {
  const std::uint64_t count = count_maximal(p, n);
  ProbabilityModel m;
  m.p = p.value();
  m.level = n;
  m.total_pairs = detail::checked_mul(count, count, "pair count");
  m.collision_pairs = count;
  m.collision_probability = Rational(1, detail::to_signed(count, "collision probability"));
  return m;
}

/// P_n(N1 = N2) = 1/((p+1) p^{n-1}).
[[nodiscard]] inline Rational collision_probability_exact(PrimeParam p, int n) {
  return Rational(1, detail::to_signed(count_maximal(p, n), "collision probability"));
}

/// P_n(N1 = N2) recomputed by enumerating all ordered pairs of canonical forms.
[[nodiscard]] inline Rational collision_probability_enumerated(PrimeParam p, int n) {
  const std::uint64_t count = count_maximal(p, n);
  if (count > kMaxExhaustiveModules) {
    throw resource_error("double enumeration is bounded to " + std::to_string(kMaxExhaustiveModules) +
                         " submodules, level has " + std::to_string(count));
  }
  std::vector<CyclicSubmodule> all;
  all.reserve(count);
  for (auto m : enumerate_maximal(p, n)) all.push_back(std::move(m));
  std::uint64_t collisions = 0;
  for (const auto& a : all) {
    for (const auto& b : all) collisions += (a == b) ? 1 : 0;
  }
  return Rational(detail::to_signed(collisions, "collision count"), detail::to_signed(count * count, "pair count"));
}

/// The same probability as sum_{M} P(N1 = M) P(N2 = M), one term per submodule.
[[nodiscard]] inline Rational collision_probability_by_sum(PrimeParam p, int n) {
  const std::uint64_t count = count_maximal(p, n);
  if (count > kMaxExhaustiveModules) {
    throw resource_error("summation is bounded to " + std::to_string(kMaxExhaustiveModules) + " submodules");
  }
  const Rational each(1, detail::to_signed(count, "collision probability"));
  Rational total(0);
  for ([[maybe_unused]] const auto& m : enumerate_maximal(p, n)) total += each * each;
  return total;
}

enum class CrossCheck { verified, mismatch, skipped };

[[nodiscard]] inline const char* to_string(CrossCheck c) {
  switch (c) {
    case CrossCheck::verified: return "verified";
    case CrossCheck::mismatch: return "mismatch";
    case CrossCheck::skipped: return "skipped";
  }
  return "unknown";
}

struct CollisionCheck {
  Rational closed_form;
  std::optional<Rational> enumerated;
  CrossCheck status = CrossCheck::skipped;
};

/// Closed form, plus the double-enumeration cross-check where it fits the bound.
[[nodiscard]] inline CollisionCheck collision_check(PrimeParam p, int n) {
  CollisionCheck out{collision_probability_exact(p, n), std::nullopt, CrossCheck::skipped};
  if (count_maximal(p, n) <= kMaxExhaustiveModules) {
    out.enumerated = collision_probability_enumerated(p, n);
    out.status = (*out.enumerated == out.closed_form) ? CrossCheck::verified : CrossCheck::mismatch;
  }
  return out;
}

/// Lower bound 1 - 1/((p+1) p^{n-1}) on P*(N1 cap N2 = 0).
[[nodiscard]] inline Rational intersection_bound(PrimeParam p, int n) {
  return Rational(1) - collision_probability_exact(p, n);
}

/// Exact law of the intersection exponent v of two independent uniform
/// maximal submodules at level n; entry k is P(v = k).
///
/// Only equal-type pairs meet nontrivially. Type A pairs have v = val(g1-g2)
/// and type B pairs v = 1 + val(h1-h2) (capped at n), which gives
/// #{pairs : v >= k} = (p^n + p^{n-1}) p^{n-k} for 1 <= k <= n, i.e.
/// P(v >= k) = 1/((p+1) p^{k-1}).
[[nodiscard]] inline std::vector<Rational> intersection_exponent_distribution(PrimeParam p, int n) {
  detail::validate_module_level(n);
  auto at_least = [&](int k) -> Rational {
    if (k == 0) return Rational(1);
    if (k > n) return Rational(0);
    const auto den = detail::checked_mul(p.value() + 1, detail::checked_pow(p.value(), k - 1, "distribution"), "distribution");
    return Rational(1, detail::to_signed(den, "distribution"));
  };
  std::vector<Rational> out;
  for (int k = 0; k <= n; ++k) out.push_back(at_least(k) - at_least(k + 1));
  return out;
}

/// Number of ordered canonical pairs with each intersection exponent, by enumeration.
[[nodiscard]] inline std::vector<std::uint64_t> intersection_census(PrimeParam p, int n) {
  const std::uint64_t count = count_maximal(p, n);
  if (count > kMaxCensusModules) {
    throw resource_error("intersection census is bounded to " + std::to_string(kMaxCensusModules) + " submodules");
  }
  std::vector<CyclicSubmodule> all;
  for (auto m : enumerate_maximal(p, n)) all.push_back(std::move(m));
  std::vector<std::uint64_t> hist(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& a : all) {
    for (const auto& b : all) ++hist[static_cast<std::size_t>(intersect(a, b).size_exponent)];
  }
  return hist;
}

// ---------------------------------------------------------------------------
// Parallel execution

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs body(begin, end, acc) over contiguous chunks of [0, trials) and
/// merges the per-chunk accumulators in chunk order.
template <typename Acc, typename Body>
Acc run_partitioned(std::uint64_t trials, unsigned threads, const Acc& empty, Body body) {
  const std::uint64_t workers = std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(trials, 1));
  std::vector<Acc> partial(workers, empty);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = trials * w / workers;
    const std::uint64_t end = trials * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] { body(begin, end, partial[w]); });
  }
  for (auto& t : pool) t.join();
  Acc total = empty;
  for (const auto& acc : partial) total += acc;
  return total;
}

inline void add_histograms(std::vector<std::uint64_t>& into, const std::vector<std::uint64_t>& from) {
  if (into.size() < from.size()) into.resize(from.size(), 0);
  for (std::size_t i = 0; i < from.size(); ++i) into[i] += from[i];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Monte-Carlo estimation of the collision probability

struct MonteCarloCounts {
  std::uint64_t trials = 0;
  std::uint64_t collisions = 0;
  std::vector<std::uint64_t> exponent_histogram;  ///< intersection size exponent v
  std::vector<std::uint64_t> quotient_histogram;  ///< quotient size exponent of Omega_n^2/(N1+N2)
  /// Trials where canonical equality, v = n and quotient exponent = n disagree, or v differs from the quotient exponent.
  std::uint64_t representation_mismatches = 0;

  MonteCarloCounts& operator+=(const MonteCarloCounts& o) {
    trials += o.trials;
    collisions += o.collisions;
    detail::add_histograms(exponent_histogram, o.exponent_histogram);
    detail::add_histograms(quotient_histogram, o.quotient_histogram);
    representation_mismatches += o.representation_mismatches;
    return *this;
  }
};

struct MonteCarloResult {
  unsigned p = 0;
  int level = 0;
  RngSpec rng;
  MonteCarloCounts counts;
  Rational exact;
  double empirical = 0.0;
  /// Binomial standard error sqrt(q(1-q)/trials) at the exact q.
  double standard_error = 0.0;

  [[nodiscard]] double delta() const { return empirical - boost::rational_cast<double>(exact); }
  [[nodiscard]] bool within_standard_errors(double k) const { return std::abs(delta()) <= k * standard_error; }
  /// Empirical P(v >= 1).
  [[nodiscard]] double nontrivial_intersection_frequency() const {
    std::uint64_t hits = 0;
    for (std::size_t v = 1; v < counts.exponent_histogram.size(); ++v) hits += counts.exponent_histogram[v];
    return static_cast<double>(hits) / static_cast<double>(counts.trials);
  }
};

/// Draws `trials` independent pairs; trial t uses streams (t, 0) and (t, 1).
[[nodiscard]] inline MonteCarloResult monte_carlo(PrimeParam p, int n, std::uint64_t trials, RngSpec rng,
                                                  unsigned threads = 1) {
  if (trials == 0) throw precondition_error("trials must be at least 1");
  detail::validate_module_level(n);
  MonteCarloCounts empty;
  empty.exponent_histogram.assign(static_cast<std::size_t>(n) + 1, 0);
  empty.quotient_histogram.assign(static_cast<std::size_t>(n) + 1, 0);

  auto counts = detail::run_partitioned(trials, threads, empty, [&](std::uint64_t begin, std::uint64_t end, MonteCarloCounts& acc) {
    for (std::uint64_t t = begin; t < end; ++t) {
      auto first_stream = rng.stream(t, 0);
      auto second_stream = rng.stream(t, 1);
      const auto a = sample_maximal(p, n, first_stream);
      const auto b = sample_maximal(p, n, second_stream);
      const bool equal = a == b;
      const int v = intersect(a, b).size_exponent;
      const int q = sum_and_quotient(a, b).quotient_size_exponent;
      ++acc.trials;
      acc.collisions += equal ? 1 : 0;
      ++acc.exponent_histogram[static_cast<std::size_t>(v)];
      ++acc.quotient_histogram[static_cast<std::size_t>(q)];
      if (equal != (v == n) || equal != (q == n) || v != q) ++acc.representation_mismatches;
    }
  });

  MonteCarloResult out;
  out.p = p.value();
  out.level = n;
  out.rng = rng;
  out.counts = std::move(counts);
  out.exact = collision_probability_exact(p, n);
  out.empirical = static_cast<double>(out.counts.collisions) / static_cast<double>(trials);
  const double q = boost::rational_cast<double>(out.exact);
  out.standard_error = std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
  return out;
}

/// Pearson chi-square of `draws` samples binned by canonical form.
struct UniformityTest {
  std::vector<std::uint64_t> counts;
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
};

[[nodiscard]] inline UniformityTest sampler_uniformity(PrimeParam p, int n, std::uint64_t draws, RngSpec rng,
                                                       unsigned threads = 1) {
  if (draws == 0) throw precondition_error("draws must be at least 1");
  const std::uint64_t bins = count_maximal(p, n);
  if (bins > kMaxExhaustiveModules) throw resource_error("uniformity test is bounded to 10000 bins");

  struct Acc {
    std::vector<std::uint64_t> counts;
    Acc& operator+=(const Acc& o) {
      detail::add_histograms(counts, o.counts);
      return *this;
    }
  };
  Acc empty{std::vector<std::uint64_t>(bins, 0)};
  auto acc = detail::run_partitioned(draws, threads, empty, [&](std::uint64_t begin, std::uint64_t end, Acc& a) {
    for (std::uint64_t k = begin; k < end; ++k) {
      auto gen = rng.stream(k, 0);
      ++a.counts[index_of(sample_maximal(p, n, gen))];
    }
  });

  UniformityTest out;
  out.counts = std::move(acc.counts);
  const double expected = static_cast<double>(draws) / static_cast<double>(bins);
  for (auto c : out.counts) {
    const double d = static_cast<double>(c) - expected;
    out.statistic += d * d / expected;
  }
  out.degrees_of_freedom = bins - 1;
  return out;
}

// ---------------------------------------------------------------------------
// Projective system

struct PushforwardReport {
  unsigned p = 0;
  int from_level = 0;  ///< n
  int to_level = 0;    ///< m >= n
  std::uint64_t expected_fiber = 0;  ///< p^{m-n}
  std::vector<std::uint64_t> fiber_sizes;  ///< indexed by the level-n canonical index
  bool fibers_uniform = false;
  bool project_lift_identity = false;
  /// The lift sets are disjoint and cover every level-m form.
  bool lifts_partition = false;
};

[[nodiscard]] inline PushforwardReport pushforward_consistency(PrimeParam p, int n, int m) {
  if (m < n) throw precondition_error("pushforward needs m >= n");
  detail::validate_module_level(n);
  detail::validate_module_level(m);
  const std::uint64_t upper = count_maximal(p, m);
  if (upper > 10'000'000) throw resource_error("pushforward enumeration is bounded to 10^7 submodules");

  PushforwardReport out;
  out.p = p.value();
  out.from_level = n;
  out.to_level = m;
  out.expected_fiber = detail::checked_pow(p.value(), m - n, "fiber size");
  out.fiber_sizes.assign(count_maximal(p, n), 0);
  for (const auto& big : enumerate_maximal(p, m)) ++out.fiber_sizes[index_of(project(big, n))];
  out.fibers_uniform = std::ranges::all_of(out.fiber_sizes, [&](std::uint64_t s) { return s == out.expected_fiber; });

  std::vector<std::uint64_t> covered(upper, 0);
  out.project_lift_identity = true;
  for (const auto& small : enumerate_maximal(p, n)) {
    std::uint64_t count = 0;
    for (const auto& lift : lifts(small, m)) {
      ++count;
      ++covered[index_of(lift)];
      if (!(project(lift, n) == small)) out.project_lift_identity = false;
    }
    if (count != out.expected_fiber) out.project_lift_identity = false;
  }
  out.lifts_partition = std::ranges::all_of(covered, [](std::uint64_t c) { return c == 1; });
  return out;
}

// ---------------------------------------------------------------------------
// Towers

/// Intersections of two towers over the levels 1..L.
struct TowerPairOutcome {
  bool equal = false;                  ///< equal at the top level
  int top_exponent = 0;                ///< v at the top level
  /// n0: least level at which the projections differ (top + 1 for equal
  /// towers). The exponent is constant from n0 on.
  int stabilization_level = 0;
  std::vector<int> exponents;          ///< exponents[L-1] = size exponent at level L
  /// Equal towers: exponent = level everywhere. Distinct: exponent = level up
  /// to v and constant v above it.
  bool consistent = false;
};

[[nodiscard]] inline TowerPairOutcome analyze_tower_pair(const CyclicSubmodule& top_a, const CyclicSubmodule& top_b) {
  detail::require_same_ambient(top_a, top_b);
  const int top = top_a.level();
  TowerPairOutcome out;
  out.equal = top_a == top_b;
  for (int level = 1; level <= top; ++level) {
    out.exponents.push_back(intersect(project(top_a, level), project(top_b, level)).size_exponent);
  }
  out.top_exponent = out.exponents.back();
  out.stabilization_level = top + 1;
  for (int level = 1; level <= top; ++level) {
    if (!(project(top_a, level) == project(top_b, level))) {
      out.stabilization_level = level;
      break;
    }
  }
  out.consistent = true;
  for (int level = 1; level <= top; ++level) {
    const int e = out.exponents[static_cast<std::size_t>(level - 1)];
    const int expected = out.equal ? level : std::min(level, out.top_exponent);
    if (e != expected) out.consistent = false;
  }
  if (!out.equal && out.stabilization_level != out.top_exponent + 1) out.consistent = false;
  return out;
}

struct TowerReport {
  unsigned p = 0;
  int max_level = 0;
  std::uint64_t pairs = 0;
  std::uint64_t equal_pairs = 0;
  std::uint64_t distinct_pairs = 0;
  std::vector<std::uint64_t> exponent_histogram;       ///< stabilized v over distinct pairs
  std::vector<std::uint64_t> stabilization_histogram;  ///< n0 over distinct pairs, indexed by level
  std::uint64_t violations = 0;                        ///< pairs with consistent == false

  TowerReport& operator+=(const TowerReport& o) {
    pairs += o.pairs;
    equal_pairs += o.equal_pairs;
    distinct_pairs += o.distinct_pairs;
    detail::add_histograms(exponent_histogram, o.exponent_histogram);
    detail::add_histograms(stabilization_histogram, o.stabilization_histogram);
    violations += o.violations;
    return *this;
  }

  void record(const TowerPairOutcome& o) {
    ++pairs;
    if (!o.consistent) ++violations;
    if (o.equal) {
      ++equal_pairs;
      return;
    }
    ++distinct_pairs;
    ++exponent_histogram[static_cast<std::size_t>(o.top_exponent)];
    ++stabilization_histogram[static_cast<std::size_t>(o.stabilization_level)];
  }
};

namespace detail {

inline TowerReport empty_tower_report(PrimeParam p, int max_level) {
  TowerReport r;
  r.p = p.value();
  r.max_level = max_level;
  r.exponent_histogram.assign(static_cast<std::size_t>(max_level) + 1, 0);
  r.stabilization_histogram.assign(static_cast<std::size_t>(max_level) + 1, 0);
  return r;
}

}  // namespace detail

/// Samples pairs at max_level and follows their projections down to level 1.
[[nodiscard]] inline TowerReport tower_experiment(PrimeParam p, int max_level, std::uint64_t trials, RngSpec rng,
                                                  unsigned threads = 1) {
  if (trials == 0) throw precondition_error("trials must be at least 1");
  detail::validate_module_level(max_level);
  const auto empty = detail::empty_tower_report(p, max_level);
  auto report = detail::run_partitioned(trials, threads, empty, [&](std::uint64_t begin, std::uint64_t end, TowerReport& acc) {
    for (std::uint64_t t = begin; t < end; ++t) {
      auto first_stream = rng.stream(t, 0);
      auto second_stream = rng.stream(t, 1);
      const auto a = sample_maximal(p, max_level, first_stream);
      const auto b = sample_maximal(p, max_level, second_stream);
      acc.record(analyze_tower_pair(a, b));
    }
  });
  report.p = p.value();
  report.max_level = max_level;
  return report;
}

/// The same statistics over every ordered canonical pair at max_level.
[[nodiscard]] inline TowerReport tower_census(PrimeParam p, int max_level) {
  if (count_maximal(p, max_level) > kMaxCensusModules) {
    throw resource_error("tower census is bounded to " + std::to_string(kMaxCensusModules) + " submodules");
  }
  auto report = detail::empty_tower_report(p, max_level);
  for (const auto& a : enumerate_maximal(p, max_level)) {
    for (const auto& b : enumerate_maximal(p, max_level)) report.record(analyze_tower_pair(a, b));
  }
  return report;
}

}  // namespace omega
