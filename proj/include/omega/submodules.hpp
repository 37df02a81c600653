#pragma once

// Maximal cyclic submodules of Omega_n^2, Omega_n = F_p[T]/(T^n).
//
// A cyclic submodule is maximal when it has a generator with a unit
// coordinate. Every such submodule has exactly one generator of one of the
// shapes
//
//   type A:  (1, g)       g in Omega_n                       p^n choices
//   type B:  (T*h, 1)     h in Omega_{n-1}                   p^{n-1} choices
//
// which is the canonical form stored by CyclicSubmodule. Type B is kept as
// its first coordinate t = T*h at level n, so n = 1 needs no level-0 ring.

#include <cstdint>
#include <algorithm>
#include <limits>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omega/errors.hpp"
#include "omega/fp_matrix.hpp"
#include "omega/fp_series.hpp"

namespace omega {

/// Largest level accepted by the enumeration and sampling layers.
inline constexpr int kMaxModuleLevel = 12;

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw resource_error(std::string(what) + " exceeds the 64-bit counting bound");
  }
  return a * b;
}

inline std::uint64_t checked_pow(std::uint64_t base, int exp, const char* what) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base, what);
  return r;
}

inline void validate_module_level(int n) {
  if (n < 1) throw precondition_error("level must be positive, got " + std::to_string(n));
  if (n > kMaxModuleLevel) {
    throw resource_error("level " + std::to_string(n) + " exceeds the module level bound " +
                         std::to_string(kMaxModuleLevel));
  }
}

}  // namespace detail

/// An element (first, second) of Omega_n^2.
class ModuleVector {
 public:
  ModuleVector(TruncatedSeries first, TruncatedSeries second) : first_(std::move(first)), second_(std::move(second)) {
    if (!(first_.prime() == second_.prime()) || first_.level() != second_.level()) {
      throw structural_error("module vector components must share prime and level");
    }
  }

  [[nodiscard]] const TruncatedSeries& first() const noexcept { return first_; }
  [[nodiscard]] const TruncatedSeries& second() const noexcept { return second_; }
  [[nodiscard]] PrimeParam prime() const noexcept { return first_.prime(); }
  [[nodiscard]] int level() const noexcept { return first_.level(); }

  /// Coordinates over F_p: coefficients of first, then of second.
  [[nodiscard]] std::vector<residue> flatten() const {
    std::vector<residue> out(first_.coeffs().begin(), first_.coeffs().end());
    out.insert(out.end(), second_.coeffs().begin(), second_.coeffs().end());
    return out;
  }

  static ModuleVector unflatten(PrimeParam p, int n, std::span<const residue> coords) {
    if (coords.size() != static_cast<std::size_t>(2 * n)) throw structural_error("flattened vector has wrong length");
    return {TruncatedSeries::from_residues(p, {coords.begin(), coords.begin() + n}),
            TruncatedSeries::from_residues(p, {coords.begin() + n, coords.end()})};
  }

  friend ModuleVector operator*(const TruncatedSeries& scalar, const ModuleVector& v) {
    return {scalar * v.first_, scalar * v.second_};
  }

  friend bool operator==(const ModuleVector&, const ModuleVector&) = default;

 private:
  TruncatedSeries first_;
  TruncatedSeries second_;
};

/// True iff v generates a maximal cyclic submodule, i.e. some coordinate is a unit.
[[nodiscard]] inline bool is_maximal(const ModuleVector& v) { return v.first().is_unit() || v.second().is_unit(); }

enum class FormType : std::uint8_t { A, B };

/// A maximal cyclic submodule of Omega_n^2 in canonical form.
class CyclicSubmodule {
 public:
  /// <(1, g)>.
  static CyclicSubmodule type_a(TruncatedSeries g) { return CyclicSubmodule(FormType::A, std::move(g)); }

  /// <(t, 1)> for t of positive valuation.
  static CyclicSubmodule type_b_from_first(TruncatedSeries t) {
    if (t.is_unit()) throw domain_error("type B first coordinate must have positive valuation");
    return CyclicSubmodule(FormType::B, std::move(t));
  }

  /// <(T*h, 1)> with h given by its n-1 coefficients.
  static CyclicSubmodule type_b(PrimeParam p, int level, std::span<const residue> h) {
    if (h.size() != static_cast<std::size_t>(level - 1)) {
      throw structural_error("type B parameter must have level - 1 coefficients");
    }
    TruncatedSeries t(p, level);
    for (std::size_t i = 0; i < h.size(); ++i) t.set_coeff(static_cast<int>(i) + 1, h[i]);
    return CyclicSubmodule(FormType::B, std::move(t));
  }

  [[nodiscard]] FormType type() const noexcept { return type_; }
  [[nodiscard]] PrimeParam prime() const noexcept { return param_.prime(); }
  [[nodiscard]] int level() const noexcept { return param_.level(); }

  /// g for type A, t = T*h for type B.
  [[nodiscard]] const TruncatedSeries& parameter() const noexcept { return param_; }

  /// The coefficients of h (length n-1) for a type B form.
  [[nodiscard]] std::vector<residue> type_b_parameter() const {
    if (type_ != FormType::B) throw precondition_error("not a type B form");
    auto c = param_.coeffs();
    return {c.begin() + 1, c.end()};
  }

  [[nodiscard]] ModuleVector generator() const {
    auto one = TruncatedSeries::one(prime(), level());
    return type_ == FormType::A ? ModuleVector(std::move(one), param_) : ModuleVector(param_, std::move(one));
  }

  friend bool operator==(const CyclicSubmodule&, const CyclicSubmodule&) = default;

 private:
  CyclicSubmodule(FormType type, TruncatedSeries param) : type_(type), param_(std::move(param)) {}

  FormType type_;
  TruncatedSeries param_;
};

[[nodiscard]] inline std::string to_string(const CyclicSubmodule& n) {
  std::string s = n.type() == FormType::A ? "A(" : "B(";
  for (auto c : n.parameter().coeffs()) s += std::to_string(c);
  return s + ")";
}

/// Normalizes a generator by a unit so that one coordinate becomes 1.
[[nodiscard]] inline CyclicSubmodule canonical_form(const ModuleVector& v) {
  if (!is_maximal(v)) throw domain_error("generator is not maximal: both coordinates lie in T*Omega_n");
  if (v.first().is_unit()) return CyclicSubmodule::type_a(invert_unit(v.first()) * v.second());
  return CyclicSubmodule::type_b_from_first(invert_unit(v.second()) * v.first());
}

/// Number of maximal cyclic submodules of Omega_n^2: p^n + p^{n-1} = p^{n-1}(p+1).
[[nodiscard]] inline std::uint64_t count_maximal(PrimeParam p, int n) {
  detail::validate_module_level(n);
  const auto base = detail::checked_pow(p.value(), n - 1, "maximal submodule count");
  return detail::checked_mul(base, p.value() + 1, "maximal submodule count");
}

/// Number of elements of Omega_n^2 that generate a maximal submodule: p^{2n} - p^{2(n-1)}.
[[nodiscard]] inline std::uint64_t count_maximal_generators(PrimeParam p, int n) {
  detail::validate_module_level(n);
  return detail::checked_pow(p.value(), 2 * n, "generator count") -
         detail::checked_pow(p.value(), 2 * (n - 1), "generator count");
}

/// The k-th canonical form: indices [0, p^n) are type A with g read as base-p
/// digits, the remaining p^{n-1} are type B with h read the same way.
[[nodiscard]] inline CyclicSubmodule nth_maximal(PrimeParam p, int n, std::uint64_t index) {
  const std::uint64_t type_a_count = detail::checked_pow(p.value(), n, "maximal submodule count");
  if (index >= count_maximal(p, n)) throw precondition_error("submodule index out of range");
  if (index < type_a_count) {
    TruncatedSeries g(p, n);
    for (int i = 0; i < n; ++i, index /= p.value()) g.set_coeff(i, static_cast<std::int64_t>(index % p.value()));
    return CyclicSubmodule::type_a(std::move(g));
  }
  index -= type_a_count;
  TruncatedSeries t(p, n);
  for (int i = 1; i < n; ++i, index /= p.value()) t.set_coeff(i, static_cast<std::int64_t>(index % p.value()));
  return CyclicSubmodule::type_b_from_first(std::move(t));
}

/// Inverse of nth_maximal.
[[nodiscard]] inline std::uint64_t index_of(const CyclicSubmodule& m) {
  const PrimeParam p = m.prime();
  const int n = m.level();
  std::uint64_t index = 0;
  std::uint64_t weight = 1;
  const int first_digit = m.type() == FormType::A ? 0 : 1;
  for (int i = first_digit; i < n; ++i) {
    index += weight * m.parameter().coeff(i);
    weight *= p.value();
  }
  if (m.type() == FormType::B) index += detail::checked_pow(p.value(), n, "maximal submodule count");
  return index;
}

/// Every maximal cyclic submodule of Omega_n^2, each exactly once, as a
/// restartable random-access view.
[[nodiscard]] inline auto enumerate_maximal(PrimeParam p, int n) {
  const std::uint64_t count = count_maximal(p, n);
  return std::views::iota(std::uint64_t{0}, count) |
         std::views::transform([p, n](std::uint64_t k) { return nth_maximal(p, n, k); });
}

namespace detail {

inline void require_same_ambient(const CyclicSubmodule& a, const CyclicSubmodule& b) {
  if (!(a.prime() == b.prime()) || a.level() != b.level()) {
    throw structural_error("submodules live in different ambient modules");
  }
}

/// T acting on flattened coordinates of Omega_n^k (blocks of length n).
inline std::vector<residue> t_times(std::span<const residue> v, int n) {
  std::vector<residue> out(v.size(), 0);
  for (std::size_t block = 0; block < v.size(); block += static_cast<std::size_t>(n)) {
    for (int i = 0; i + 1 < n; ++i) out[block + static_cast<std::size_t>(i) + 1] = v[block + static_cast<std::size_t>(i)];
  }
  return out;
}

inline bool all_zero(std::span<const residue> v) {
  return std::ranges::all_of(v, [](residue c) { return c == 0; });
}

}  // namespace detail

/// F_p basis {T^i * generator} of the submodule, in reduced echelon form.
[[nodiscard]] inline FpMatrix span_basis(const CyclicSubmodule& m) {
  const int n = m.level();
  FpMatrix basis(m.prime(), 0, static_cast<std::size_t>(2 * n));
  auto v = m.generator().flatten();
  for (int i = 0; i < n; ++i) {
    basis.append_row(v);
    v = detail::t_times(v, n);
  }
  basis.reduce();
  return basis;
}

/// N1 cap N2 has p^{size_exponent} elements; generator is set when it is nonzero.
struct Intersection {
  int size_exponent = 0;
  std::optional<ModuleVector> generator;
};

/// Intersection through F_p linear algebra on the spans.
[[nodiscard]] inline Intersection intersect_by_linear_algebra(const CyclicSubmodule& a, const CyclicSubmodule& b) {
  detail::require_same_ambient(a, b);
  const int n = a.level();
  const FpMatrix common = intersect_row_spaces(span_basis(a), span_basis(b));
  Intersection out{static_cast<int>(common.rows()), std::nullopt};
  if (common.rows() == 0) return out;
  // A submodule of a uniserial module is cyclic; any element of maximal
  // T-nilpotency order generates it.
  int best_order = -1;
  std::vector<residue> best;
  for (std::size_t r = 0; r < common.rows(); ++r) {
    auto v = common.row_vector(r);
    int order = 0;
    for (auto w = v; !detail::all_zero(w); w = detail::t_times(w, n)) ++order;
    if (order > best_order) {
      best_order = order;
      best = std::move(v);
    }
  }
  out.generator = ModuleVector::unflatten(a.prime(), n, best);
  return out;
}

/// Intersection of two maximal cyclic submodules. For equal types the size
/// exponent is the valuation of the parameter difference and the
/// intersection is T^{n-v} N1; mixed types go through linear algebra.
[[nodiscard]] inline Intersection intersect(const CyclicSubmodule& a, const CyclicSubmodule& b) {
  detail::require_same_ambient(a, b);
  if (a.type() != b.type()) return intersect_by_linear_algebra(a, b);
  const int n = a.level();
  const int v = (a.parameter() - b.parameter()).valuation();
  Intersection out{v, std::nullopt};
  if (v > 0) out.generator = TruncatedSeries::t_power(a.prime(), n, n - v) * a.generator();
  return out;
}

/// Omega_n^2 / (N1 + N2): size exponent and the exponents k_j of its cyclic
/// decomposition  (+)_j Omega_{k_j}, in decreasing order.
struct QuotientInvariants {
  int quotient_size_exponent = 0;
  std::vector<int> cyclic_structure;
};

[[nodiscard]] inline QuotientInvariants sum_and_quotient(const CyclicSubmodule& a, const CyclicSubmodule& b) {
  detail::require_same_ambient(a, b);
  const int n = a.level();
  const auto dim = static_cast<std::size_t>(2 * n);
  const FpMatrix sum = span_basis(a).stacked(span_basis(b)).rref();

  // d[k] = dim T^k Q = dim (T^k V + S) - dim S.
  std::vector<int> d(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 0; k <= n; ++k) {
    FpMatrix m = sum;
    std::vector<residue> e(dim, 0);
    for (int i = k; i < n; ++i) {
      for (std::size_t block : {std::size_t{0}, static_cast<std::size_t>(n)}) {
        std::fill(e.begin(), e.end(), 0);
        e[block + static_cast<std::size_t>(i)] = 1;
        m.append_row(e);
      }
    }
    d[static_cast<std::size_t>(k)] = static_cast<int>(m.rank() - sum.rows());
  }

  QuotientInvariants out;
  out.quotient_size_exponent = d[0];
  // Factors of exponent >= k number d[k-1] - d[k].
  for (int k = n; k >= 1; --k) {
    const int at_least_k = d[static_cast<std::size_t>(k - 1)] - d[static_cast<std::size_t>(k)];
    const int at_least_k_plus_1 = k < n ? d[static_cast<std::size_t>(k)] - d[static_cast<std::size_t>(k + 1)] : 0;
    for (int j = 0; j < at_least_k - at_least_k_plus_1; ++j) out.cyclic_structure.push_back(k);
  }
  return out;
}

/// The image under Omega_n^2 -> Omega_m^2 for m <= n.
[[nodiscard]] inline CyclicSubmodule project(const CyclicSubmodule& m, int target_level) {
  if (target_level < 1 || target_level > m.level()) {
    throw precondition_error("projection target level must lie in [1, " + std::to_string(m.level()) + "]");
  }
  auto truncated = m.parameter().truncated(target_level);
  return m.type() == FormType::A ? CyclicSubmodule::type_a(std::move(truncated))
                                 : CyclicSubmodule::type_b_from_first(std::move(truncated));
}

/// The k-th lift of m to target_level: the parameter gains the base-p digits
/// of k as coefficients of T^level, ..., T^{target_level-1}.
[[nodiscard]] inline CyclicSubmodule nth_lift(const CyclicSubmodule& m, int target_level, std::uint64_t k) {
  auto param = m.parameter().zero_extended(target_level);
  const unsigned p = m.prime().value();
  for (int i = m.level(); i < target_level; ++i, k /= p) param.set_coeff(i, static_cast<std::int64_t>(k % p));
  return m.type() == FormType::A ? CyclicSubmodule::type_a(std::move(param))
                                 : CyclicSubmodule::type_b_from_first(std::move(param));
}

/// All canonical forms at target_level projecting onto m; p^{target_level - level} of them.
[[nodiscard]] inline auto lifts(const CyclicSubmodule& m, int target_level) {
  if (target_level < m.level()) {
    throw precondition_error("lift target level must be at least " + std::to_string(m.level()));
  }
  detail::validate_module_level(target_level);
  const std::uint64_t fiber = detail::checked_pow(m.prime().value(), target_level - m.level(), "lift count");
  return std::views::iota(std::uint64_t{0}, fiber) |
         std::views::transform([m, target_level](std::uint64_t k) { return nth_lift(m, target_level, k); });
}

/// Compatible canonical forms at an ascending list of levels; the finite
/// stand-in for a maximal submodule of Omega^2.
class SubmoduleTower {
 public:
  SubmoduleTower(std::vector<int> levels, std::vector<CyclicSubmodule> stages)
      : levels_(std::move(levels)), stages_(std::move(stages)) {
    if (levels_.empty() || levels_.size() != stages_.size()) {
      throw structural_error("tower needs one stage per level");
    }
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      if (stages_[k].level() != levels_[k]) throw structural_error("tower stage level mismatch");
      if (k > 0) {
        if (levels_[k] <= levels_[k - 1]) throw precondition_error("tower levels must be strictly ascending");
        if (!(project(stages_[k], levels_[k - 1]) == stages_[k - 1])) {
          throw domain_error("tower stages are not compatible under projection");
        }
      }
    }
  }

  /// The tower obtained by projecting `top` to each of `levels`.
  static SubmoduleTower from_top(const CyclicSubmodule& top, std::vector<int> levels) {
    std::vector<CyclicSubmodule> stages;
    stages.reserve(levels.size());
    for (int level : levels) stages.push_back(project(top, level));
    return {std::move(levels), std::move(stages)};
  }

  [[nodiscard]] const std::vector<int>& levels() const noexcept { return levels_; }
  [[nodiscard]] const std::vector<CyclicSubmodule>& stages() const noexcept { return stages_; }
  [[nodiscard]] const CyclicSubmodule& top() const noexcept { return stages_.back(); }

  [[nodiscard]] const CyclicSubmodule& at_level(int level) const {
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      if (levels_[k] == level) return stages_[k];
    }
    throw precondition_error("tower has no stage at level " + std::to_string(level));
  }

  friend bool operator==(const SubmoduleTower&, const SubmoduleTower&) = default;

 private:
  std::vector<int> levels_;
  std::vector<CyclicSubmodule> stages_;
};

}  // namespace omega
