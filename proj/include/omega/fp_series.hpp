#pragma once

// Arithmetic in the truncated power-series ring F_p[T]/(T^n).
//
// Elements are stored least-degree-first as residues in [0, p). The
// distinguished element gamma = 1 + T generates the cyclic group
// Gamma/Gamma^n whenever n is a power of p, in which case the ring is the
// group algebra F_p[Gamma/Gamma^n] and gamma_basis() converts between the
// two coordinate systems.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omega/errors.hpp"

namespace omega {

using residue = std::uint32_t;

inline constexpr unsigned kMaxPrime = 97;
/// Upper bound on a series level. Module enumerations apply the tighter kMaxModuleLevel.
inline constexpr int kMaxSeriesLevel = 4096;

namespace detail {

constexpr bool is_prime(unsigned v) {
  if (v < 2) return false;
  for (unsigned d = 2; d * d <= v; ++d) {
    if (v % d == 0) return false;
  }
  return true;
}

}  // namespace detail

/// An odd prime 3 <= p <= 97, validated on construction.
class PrimeParam {
 public:
  explicit PrimeParam(unsigned p) : p_(p) {
    if (p < 3 || p > kMaxPrime || !detail::is_prime(p)) {
      throw precondition_error("prime must be an odd prime in [3, 97], got " + std::to_string(p));
    }
  }

  [[nodiscard]] unsigned value() const noexcept { return p_; }

  [[nodiscard]] residue reduce(std::int64_t v) const noexcept {
    auto r = v % static_cast<std::int64_t>(p_);
    return static_cast<residue>(r < 0 ? r + p_ : r);
  }
  [[nodiscard]] residue add(residue a, residue b) const noexcept { return (a + b) % p_; }
  [[nodiscard]] residue sub(residue a, residue b) const noexcept { return (a + p_ - b) % p_; }
  [[nodiscard]] residue neg(residue a) const noexcept { return a == 0 ? 0 : p_ - a; }
  [[nodiscard]] residue mul(residue a, residue b) const noexcept { return (a * b) % p_; }

  /// Multiplicative inverse of a nonzero residue (Fermat).
  [[nodiscard]] residue inv(residue a) const {
    if (a % p_ == 0) throw domain_error("zero has no inverse in F_p");
    residue result = 1;
    residue base = a % p_;
    for (unsigned e = p_ - 2; e > 0; e >>= 1) {
      if (e & 1U) result = mul(result, base);
      base = mul(base, base);
    }
    return result;
  }

  friend bool operator==(const PrimeParam&, const PrimeParam&) = default;

 private:
  unsigned p_;
};

/// True iff n = p^k for some k >= 0.
[[nodiscard]] inline bool is_power_of(unsigned p, int n) {
  if (n < 1) return false;
  auto v = static_cast<unsigned>(n);
  while (v % p == 0) v /= p;
  return v == 1;
}

/// An element of F_p[T]/(T^n).
class TruncatedSeries {
 public:
  /// The zero element at the given level.
  TruncatedSeries(PrimeParam p, int level) : p_(p), coeffs_(checked_level(level), 0) {}

  /// Coefficients are given least-degree-first and reduced mod p; missing
  /// high coefficients are zero, extra ones are truncated away.
  TruncatedSeries(PrimeParam p, int level, std::span<const std::int64_t> coeffs)
      : TruncatedSeries(p, level) {
    for (std::size_t i = 0; i < coeffs.size() && i < coeffs_.size(); ++i) {
      coeffs_[i] = p_.reduce(coeffs[i]);
    }
  }
  TruncatedSeries(PrimeParam p, int level, std::initializer_list<std::int64_t> coeffs)
      : TruncatedSeries(p, level, std::span<const std::int64_t>(coeffs.begin(), coeffs.size())) {}

  static TruncatedSeries from_residues(PrimeParam p, std::vector<residue> coeffs) {
    TruncatedSeries out(p, static_cast<int>(coeffs.size()));
    for (std::size_t i = 0; i < coeffs.size(); ++i) out.coeffs_[i] = coeffs[i] % p.value();
    return out;
  }

  static TruncatedSeries constant(PrimeParam p, int level, std::int64_t c) {
    TruncatedSeries out(p, level);
    out.coeffs_[0] = p.reduce(c);
    return out;
  }
  static TruncatedSeries one(PrimeParam p, int level) { return constant(p, level, 1); }

  /// T^k (zero when k >= level).
  static TruncatedSeries t_power(PrimeParam p, int level, int k) {
    TruncatedSeries out(p, level);
    if (k >= 0 && k < level) out.coeffs_[static_cast<std::size_t>(k)] = 1;
    return out;
  }

  /// gamma = 1 + T.
  static TruncatedSeries gamma(PrimeParam p, int level) {
    TruncatedSeries out = one(p, level);
    if (level > 1) out.coeffs_[1] = 1;
    return out;
  }

  [[nodiscard]] PrimeParam prime() const noexcept { return p_; }
  [[nodiscard]] int level() const noexcept { return static_cast<int>(coeffs_.size()); }
  [[nodiscard]] residue coeff(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }
  [[nodiscard]] std::span<const residue> coeffs() const noexcept { return coeffs_; }

  void set_coeff(int i, std::int64_t v) { coeffs_.at(static_cast<std::size_t>(i)) = p_.reduce(v); }

  [[nodiscard]] bool is_zero() const noexcept {
    for (auto c : coeffs_) {
      if (c != 0) return false;
    }
    return true;
  }

  /// Least i with a nonzero coefficient; level() for the zero element.
  [[nodiscard]] int valuation() const noexcept {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] != 0) return static_cast<int>(i);
    }
    return level();
  }

  [[nodiscard]] bool is_unit() const noexcept { return coeffs_[0] != 0; }

  /// Image under F_p[T]/(T^n) -> F_p[T]/(T^m), m <= n.
  [[nodiscard]] TruncatedSeries truncated(int target_level) const {
    if (target_level > level()) {
      throw precondition_error("truncation target level exceeds current level");
    }
    TruncatedSeries out(p_, target_level);
    std::copy_n(coeffs_.begin(), target_level, out.coeffs_.begin());
    return out;
  }

  /// The lift with zero coefficients in degrees [level, target_level).
  [[nodiscard]] TruncatedSeries zero_extended(int target_level) const {
    if (target_level < level()) {
      throw precondition_error("extension target level is below current level");
    }
    TruncatedSeries out(p_, target_level);
    std::copy(coeffs_.begin(), coeffs_.end(), out.coeffs_.begin());
    return out;
  }

  /// Multiplication by T^k.
  [[nodiscard]] TruncatedSeries shifted_up(int k) const {
    TruncatedSeries out(p_, level());
    for (int i = 0; i + k < level(); ++i) {
      out.coeffs_[static_cast<std::size_t>(i + k)] = coeffs_[static_cast<std::size_t>(i)];
    }
    return out;
  }

  TruncatedSeries& operator+=(const TruncatedSeries& rhs) {
    check_compatible(rhs);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = p_.add(coeffs_[i], rhs.coeffs_[i]);
    return *this;
  }
  TruncatedSeries& operator-=(const TruncatedSeries& rhs) {
    check_compatible(rhs);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = p_.sub(coeffs_[i], rhs.coeffs_[i]);
    return *this;
  }
  TruncatedSeries& operator*=(const TruncatedSeries& rhs) { return *this = *this * rhs; }

  friend TruncatedSeries operator+(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs += rhs; }
  friend TruncatedSeries operator-(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs -= rhs; }

  friend TruncatedSeries operator-(TruncatedSeries x) {
    for (auto& c : x.coeffs_) c = x.p_.neg(c);
    return x;
  }

  /// Convolution truncated at degree n.
  friend TruncatedSeries operator*(const TruncatedSeries& lhs, const TruncatedSeries& rhs) {
    lhs.check_compatible(rhs);
    const auto n = lhs.coeffs_.size();
    const std::uint64_t p = lhs.p_.value();
    TruncatedSeries out(lhs.p_, static_cast<int>(n));
    for (std::size_t k = 0; k < n; ++k) {
      // p <= 97 and n <= 4096 keep the accumulator far below 2^64.
      std::uint64_t acc = 0;
      for (std::size_t i = 0; i <= k; ++i) acc += std::uint64_t{lhs.coeffs_[i]} * rhs.coeffs_[k - i];
      out.coeffs_[k] = static_cast<residue>(acc % p);
    }
    return out;
  }

  friend TruncatedSeries operator*(residue c, TruncatedSeries x) {
    for (auto& v : x.coeffs_) v = x.p_.mul(v, c % x.p_.value());
    return x;
  }

  friend bool operator==(const TruncatedSeries&, const TruncatedSeries&) = default;

 private:
  static std::size_t checked_level(int level) {
    if (level < 1 || level > kMaxSeriesLevel) {
      throw precondition_error("series level must lie in [1, " + std::to_string(kMaxSeriesLevel) +
                               "], got " + std::to_string(level));
    }
    return static_cast<std::size_t>(level);
  }

  void check_compatible(const TruncatedSeries& rhs) const {
    if (!(p_ == rhs.p_)) throw structural_error("series over different primes");
    if (level() != rhs.level()) {
      throw structural_error("series at different levels (" + std::to_string(level()) + " vs " +
                             std::to_string(rhs.level()) + ")");
    }
  }

  PrimeParam p_;
  std::vector<residue> coeffs_;
};

/// The inverse of a unit, by the coefficient recursion
/// y_0 = x_0^{-1}, y_k = -y_0 * sum_{i=1..k} x_i y_{k-i}.
[[nodiscard]] inline TruncatedSeries invert_unit(const TruncatedSeries& x) {
  if (!x.is_unit()) {
    throw domain_error("cannot invert a non-unit: valuation " + std::to_string(x.valuation()) + " > 0");
  }
  const PrimeParam p = x.prime();
  const int n = x.level();
  const auto xs = x.coeffs();
  std::vector<residue> y(static_cast<std::size_t>(n), 0);
  const residue y0 = p.inv(xs[0]);
  y[0] = y0;
  for (int k = 1; k < n; ++k) {
    std::uint64_t acc = 0;
    for (int i = 1; i <= k; ++i) acc += std::uint64_t{xs[static_cast<std::size_t>(i)]} * y[static_cast<std::size_t>(k - i)];
    y[static_cast<std::size_t>(k)] = p.neg(p.mul(y0, static_cast<residue>(acc % p.value())));
  }
  return TruncatedSeries::from_residues(p, std::move(y));
}

/// The involution induced by gamma -> gamma^{-1}, evaluated by substituting
/// T -> (1+T)^{-1} - 1 (Horner scheme). Valid at every level.
[[nodiscard]] inline TruncatedSeries iota_by_substitution(const TruncatedSeries& x) {
  const PrimeParam p = x.prime();
  const int n = x.level();
  const TruncatedSeries u = invert_unit(TruncatedSeries::gamma(p, n)) - TruncatedSeries::one(p, n);
  TruncatedSeries acc = TruncatedSeries::constant(p, n, x.coeff(n - 1));
  for (int i = n - 2; i >= 0; --i) {
    acc = acc * u;
    acc.set_coeff(0, acc.coeff(0) + x.coeff(i));
  }
  return acc;
}

namespace detail {

/// Rows of Pascal's triangle mod p up to row n-1; binom[j][i] = C(j, i) mod p.
inline std::vector<std::vector<residue>> binomials_mod(PrimeParam p, int n) {
  std::vector<std::vector<residue>> rows(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    auto& row = rows[static_cast<std::size_t>(j)];
    row.assign(static_cast<std::size_t>(j) + 1, 1);
    for (int i = 1; i < j; ++i) {
      const auto& prev = rows[static_cast<std::size_t>(j - 1)];
      row[static_cast<std::size_t>(i)] = p.add(prev[static_cast<std::size_t>(i - 1)], prev[static_cast<std::size_t>(i)]);
    }
  }
  return rows;
}

inline void require_group_ring_level(const PrimeParam& p, int n) {
  if (!is_power_of(p.value(), n)) {
    throw precondition_error("gamma basis requires the level to be a power of p=" + std::to_string(p.value()) +
                             ", got " + std::to_string(n));
  }
}

}  // namespace detail

/// Coordinates of x in the basis {gamma^0, ..., gamma^{n-1}}. Requires n = p^k.
[[nodiscard]] inline std::vector<residue> gamma_basis(const TruncatedSeries& x) {
  const PrimeParam p = x.prime();
  const int n = x.level();
  detail::require_group_ring_level(p, n);
  const auto binom = detail::binomials_mod(p, n);
  // T^i = (gamma - 1)^i = sum_j C(i, j) (-1)^{i-j} gamma^j
  std::vector<residue> out(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const residue xi = x.coeff(i);
    if (xi == 0) continue;
    for (int j = 0; j <= i; ++j) {
      residue term = p.mul(xi, binom[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      if ((i - j) % 2 != 0) term = p.neg(term);
      out[static_cast<std::size_t>(j)] = p.add(out[static_cast<std::size_t>(j)], term);
    }
  }
  return out;
}

/// Inverse of gamma_basis: gamma^j = sum_i C(j, i) T^i.
[[nodiscard]] inline TruncatedSeries from_gamma_basis(PrimeParam p, std::span<const residue> coords) {
  const int n = static_cast<int>(coords.size());
  detail::require_group_ring_level(p, n);
  const auto binom = detail::binomials_mod(p, n);
  std::vector<residue> out(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) {
    const residue cj = coords[static_cast<std::size_t>(j)] % p.value();
    if (cj == 0) continue;
    for (int i = 0; i <= j; ++i) {
      out[static_cast<std::size_t>(i)] =
          p.add(out[static_cast<std::size_t>(i)], p.mul(cj, binom[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]));
    }
  }
  return TruncatedSeries::from_residues(p, std::move(out));
}

/// The involution gamma -> gamma^{-1}. At group-ring levels (n = p^k) it is a
/// reversal of gamma coordinates, otherwise it falls back to substitution.
[[nodiscard]] inline TruncatedSeries iota(const TruncatedSeries& x) {
  const PrimeParam p = x.prime();
  const int n = x.level();
  if (!is_power_of(p.value(), n)) return iota_by_substitution(x);
  const auto g = gamma_basis(x);
  std::vector<residue> reversed(g.size(), 0);
  reversed[0] = g[0];
  for (std::size_t k = 1; k < g.size(); ++k) reversed[g.size() - k] = g[k];
  return from_gamma_basis(p, reversed);
}

}  // namespace omega
