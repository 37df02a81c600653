#pragma once

// A finite model of a self-dual Omega-module with an iota-equivariant pairing:
//
//   V = (Omega_n a (+) Omega_n b) (+) (+)_i (Omega_{m_i} e_i (+) Omega_{m_i} f_i)
//
// with all levels powers of p. On a block of level m the pairing is
//
//   (x_a a + x_b b, y_a a + y_b b) = eps_m(x_a iota(y_b) - x_b iota(y_a)),
//
// where eps_m takes the coefficient of gamma^0 in F_p[Gamma/Gamma^m]. Blocks
// are mutually orthogonal. Since eps_m o iota = eps_m the form is
// alternating, and (gamma^j a, gamma^k b) = delta_{jk}.
//
// Vectors are flattened block by block as [a-coefficients, b-coefficients]
// in the T-power basis.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omega/errors.hpp"
#include "omega/fp_matrix.hpp"
#include "omega/fp_series.hpp"

namespace omega {

inline constexpr std::size_t kMaxPairingDimension = 4096;
inline constexpr std::size_t kMaxIsotropicEnumerationDimension = 12;

class SpaceShape {
 public:
  SpaceShape(PrimeParam p, int rank_level, std::vector<int> torsion_levels = {})
      : p_(p), rank_level_(rank_level), torsion_levels_(std::move(torsion_levels)) {
    check_level(rank_level_, "rank level");
    std::size_t dim = 2 * static_cast<std::size_t>(rank_level_);
    for (int m : torsion_levels_) {
      check_level(m, "torsion level");
      dim += 2 * static_cast<std::size_t>(m);
    }
    if (dim > kMaxPairingDimension) {
      throw resource_error("space dimension " + std::to_string(dim) + " exceeds the bound " +
                           std::to_string(kMaxPairingDimension));
    }
    std::size_t offset = 0;
    for (std::size_t b = 0; b < block_count(); ++b) {
      offsets_.push_back(offset);
      offset += 2 * static_cast<std::size_t>(block_level(b));
    }
    dimension_ = offset;
  }

  [[nodiscard]] PrimeParam prime() const noexcept { return p_; }
  [[nodiscard]] int rank_level() const noexcept { return rank_level_; }
  [[nodiscard]] const std::vector<int>& torsion_levels() const noexcept { return torsion_levels_; }

  /// Block 0 is the (a, b) rank block, block i >= 1 is (e_i, f_i).
  [[nodiscard]] std::size_t block_count() const noexcept { return 1 + torsion_levels_.size(); }
  [[nodiscard]] int block_level(std::size_t block) const {
    return block == 0 ? rank_level_ : torsion_levels_.at(block - 1);
  }
  /// Start of the block's first-generator coordinates; the second generator follows after block_level().
  [[nodiscard]] std::size_t block_offset(std::size_t block) const { return offsets_.at(block); }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t rank_part_dimension() const noexcept { return 2 * static_cast<std::size_t>(rank_level_); }
  [[nodiscard]] int max_level() const {
    int m = rank_level_;
    for (int t : torsion_levels_) m = std::max(m, t);
    return m;
  }

  friend bool operator==(const SpaceShape& a, const SpaceShape& b) {
    return a.p_ == b.p_ && a.rank_level_ == b.rank_level_ && a.torsion_levels_ == b.torsion_levels_;
  }

 private:
  void check_level(int m, const char* what) const {
    if (!is_power_of(p_.value(), m)) {
      throw precondition_error(std::string(what) + " must be a power of p=" + std::to_string(p_.value()) + ", got " +
                               std::to_string(m));
    }
  }

  PrimeParam p_;
  int rank_level_;
  std::vector<int> torsion_levels_;
  std::vector<std::size_t> offsets_;
  std::size_t dimension_ = 0;
};

/// An element of V: one series per distinguished generator (a, b, e_1, f_1, ...).
class SpaceElement {
 public:
  static SpaceElement zero(const SpaceShape& shape) {
    std::vector<TruncatedSeries> coords;
    for (std::size_t b = 0; b < shape.block_count(); ++b) {
      coords.emplace_back(shape.prime(), shape.block_level(b));
      coords.emplace_back(shape.prime(), shape.block_level(b));
    }
    return SpaceElement(shape, std::move(coords));
  }

  /// Generator number `index` in the order a, b, e_1, f_1, e_2, f_2, ...
  static SpaceElement generator(const SpaceShape& shape, std::size_t index) {
    SpaceElement out = zero(shape);
    auto& c = out.coords_.at(index);
    c = TruncatedSeries::one(shape.prime(), c.level());
    return out;
  }

  static SpaceElement from_coords(const SpaceShape& shape, std::vector<TruncatedSeries> coords) {
    if (coords.size() != 2 * shape.block_count()) throw structural_error("wrong number of coordinates for shape");
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (!(coords[i].prime() == shape.prime()) || coords[i].level() != shape.block_level(i / 2)) {
        throw structural_error("coordinate " + std::to_string(i) + " does not match its block level");
      }
    }
    return SpaceElement(shape, std::move(coords));
  }

  static SpaceElement from_flat(const SpaceShape& shape, std::span<const residue> flat) {
    if (flat.size() != shape.dimension()) throw structural_error("flat vector length does not match dimension");
    std::vector<TruncatedSeries> coords;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < shape.block_count(); ++b) {
      const auto m = static_cast<std::size_t>(shape.block_level(b));
      for (int side = 0; side < 2; ++side, pos += m) {
        coords.push_back(TruncatedSeries::from_residues(shape.prime(), {flat.begin() + static_cast<std::ptrdiff_t>(pos),
                                                                        flat.begin() + static_cast<std::ptrdiff_t>(pos + m)}));
      }
    }
    return SpaceElement(shape, std::move(coords));
  }

  [[nodiscard]] const SpaceShape& shape() const noexcept { return shape_; }
  [[nodiscard]] const std::vector<TruncatedSeries>& coords() const noexcept { return coords_; }
  [[nodiscard]] const TruncatedSeries& coord(std::size_t i) const { return coords_.at(i); }

  [[nodiscard]] std::vector<residue> flatten() const {
    std::vector<residue> out;
    out.reserve(shape_.dimension());
    for (const auto& c : coords_) out.insert(out.end(), c.coeffs().begin(), c.coeffs().end());
    return out;
  }

  /// tau * x for tau in Omega_N, N at least the largest block level; tau acts on
  /// each block through its truncation.
  [[nodiscard]] SpaceElement scaled(const TruncatedSeries& tau) const {
    if (tau.level() < shape_.max_level()) throw structural_error("scalar level is below the largest block level");
    SpaceElement out = *this;
    for (auto& c : out.coords_) c = tau.truncated(c.level()) * c;
    return out;
  }

  SpaceElement& operator+=(const SpaceElement& rhs) {
    require_same_shape(rhs);
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += rhs.coords_[i];
    return *this;
  }
  friend SpaceElement operator+(SpaceElement lhs, const SpaceElement& rhs) { return lhs += rhs; }

  friend bool operator==(const SpaceElement&, const SpaceElement&) = default;

 private:
  SpaceElement(SpaceShape shape, std::vector<TruncatedSeries> coords) : shape_(std::move(shape)), coords_(std::move(coords)) {}

  void require_same_shape(const SpaceElement& rhs) const {
    if (!(shape_ == rhs.shape_)) throw structural_error("elements belong to different spaces");
  }

  SpaceShape shape_;
  std::vector<TruncatedSeries> coords_;
};

/// Coefficient of gamma^0 when z is written in the gamma basis. Since
/// T^i = (gamma - 1)^i, this is sum_i (-1)^i z_i.
[[nodiscard]] inline residue identity_coefficient(const TruncatedSeries& z) {
  const PrimeParam p = z.prime();
  residue acc = 0;
  for (int i = 0; i < z.level(); ++i) acc = (i % 2 == 0) ? p.add(acc, z.coeff(i)) : p.sub(acc, z.coeff(i));
  return acc;
}

/// The pairing, evaluated from its defining formula in the ring.
[[nodiscard]] inline residue pairing(const SpaceElement& x, const SpaceElement& y) {
  if (!(x.shape() == y.shape())) throw structural_error("pairing of elements from different spaces");
  const PrimeParam p = x.shape().prime();
  residue total = 0;
  for (std::size_t b = 0; b < x.shape().block_count(); ++b) {
    const auto& xa = x.coord(2 * b);
    const auto& xb = x.coord(2 * b + 1);
    const auto& ya = y.coord(2 * b);
    const auto& yb = y.coord(2 * b + 1);
    total = p.add(total, identity_coefficient(xa * iota(yb) - xb * iota(ya)));
  }
  return total;
}

/// G[i][j] = eps_m(T^i iota(T^j)), the block pairing in T-power coordinates.
/// In gamma coordinates eps_m(x iota(y)) is the dot product, so G = C^T C
/// with C the change of basis to gamma coordinates.
[[nodiscard]] inline FpMatrix block_gram(PrimeParam p, int m) {
  const auto n = static_cast<std::size_t>(m);
  std::vector<std::vector<residue>> columns;
  columns.reserve(n);
  for (int i = 0; i < m; ++i) columns.push_back(gamma_basis(TruncatedSeries::t_power(p, m, i)));
  FpMatrix g(p, n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::uint64_t acc = 0;
      for (std::size_t k = 0; k < n; ++k) acc += std::uint64_t{columns[i][k]} * columns[j][k];
      g.at(i, j) = g.at(j, i) = static_cast<residue>(acc % p.value());
    }
  }
  return g;
}

/// Maps flat coordinate vectors r to the linear functional y -> (r, y).
class PairingOperator {
 public:
  explicit PairingOperator(SpaceShape shape) : shape_(std::move(shape)) {
    for (std::size_t b = 0; b < shape_.block_count(); ++b) {
      const int m = shape_.block_level(b);
      if (!grams_.contains(m)) grams_.emplace(m, block_gram(shape_.prime(), m));
    }
  }

  [[nodiscard]] const SpaceShape& shape() const noexcept { return shape_; }

  /// (r, y) = sum_blocks r_a^T G y_b - r_b^T G y_a.
  [[nodiscard]] std::vector<residue> functional(std::span<const residue> r) const {
    const PrimeParam p = shape_.prime();
    std::vector<residue> out(shape_.dimension(), 0);
    for (std::size_t b = 0; b < shape_.block_count(); ++b) {
      const auto m = static_cast<std::size_t>(shape_.block_level(b));
      const auto off = shape_.block_offset(b);
      const FpMatrix& g = grams_.at(static_cast<int>(m));
      for (std::size_t j = 0; j < m; ++j) {
        std::uint64_t from_a = 0;
        std::uint64_t from_b = 0;
        for (std::size_t i = 0; i < m; ++i) {
          from_a += std::uint64_t{r[off + i]} * g.at(i, j);
          from_b += std::uint64_t{r[off + m + i]} * g.at(i, j);
        }
        out[off + j] = p.neg(static_cast<residue>(from_b % p.value()));
        out[off + m + j] = static_cast<residue>(from_a % p.value());
      }
    }
    return out;
  }

  [[nodiscard]] residue evaluate(std::span<const residue> x, std::span<const residue> y) const {
    const auto f = functional(x);
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += std::uint64_t{f[i]} * y[i];
    return static_cast<residue>(acc % shape_.prime().value());
  }

 private:
  SpaceShape shape_;
  std::map<int, FpMatrix> grams_;
};

/// Full Gram matrix on the flat basis; entry (i, j) = (e_i, e_j).
[[nodiscard]] inline FpMatrix gram_matrix(const SpaceShape& shape) {
  const PairingOperator op(shape);
  FpMatrix g(shape.prime(), 0, shape.dimension());
  std::vector<residue> e(shape.dimension(), 0);
  for (std::size_t i = 0; i < shape.dimension(); ++i) {
    std::fill(e.begin(), e.end(), 0);
    e[i] = 1;
    g.append_row(op.functional(e));
  }
  return g;
}

/// T acting on flat coordinates.
[[nodiscard]] inline std::vector<residue> apply_t(const SpaceShape& shape, std::span<const residue> v) {
  std::vector<residue> out(v.size(), 0);
  for (std::size_t b = 0; b < shape.block_count(); ++b) {
    const auto m = static_cast<std::size_t>(shape.block_level(b));
    for (std::size_t start : {shape.block_offset(b), shape.block_offset(b) + m}) {
      for (std::size_t i = 0; i + 1 < m; ++i) out[start + i + 1] = v[start + i];
    }
  }
  return out;
}

/// An F_p-subspace of V held as a reduced echelon basis.
class FpSubspace {
 public:
  static FpSubspace zero(const SpaceShape& shape) { return FpSubspace(shape, FpMatrix(shape.prime(), 0, shape.dimension())); }

  static FpSubspace whole(const SpaceShape& shape) {
    return FpSubspace(shape, FpMatrix::identity(shape.prime(), shape.dimension()));
  }

  /// Span of the rows of `generators`.
  static FpSubspace span(const SpaceShape& shape, FpMatrix generators) {
    if (generators.cols() != shape.dimension()) throw structural_error("generator width does not match dimension");
    generators.reduce();
    return FpSubspace(shape, std::move(generators));
  }

  /// The smallest T-stable subspace containing the generators (the Omega-submodule they generate).
  static FpSubspace t_closure(const SpaceShape& shape, const FpMatrix& generators) {
    FpMatrix rows(shape.prime(), 0, shape.dimension());
    for (std::size_t r = 0; r < generators.rows(); ++r) {
      auto v = generators.row_vector(r);
      for (int k = 0; k < shape.max_level(); ++k) {
        rows.append_row(v);
        v = apply_t(shape, v);
      }
    }
    return span(shape, std::move(rows));
  }

  [[nodiscard]] const SpaceShape& shape() const noexcept { return shape_; }
  [[nodiscard]] const FpMatrix& basis() const noexcept { return basis_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return basis_.rows(); }

  [[nodiscard]] bool contains(std::span<const residue> v) const {
    const auto rest = reduce_against(basis_, {v.begin(), v.end()});
    return std::ranges::all_of(rest, [](residue c) { return c == 0; });
  }

  [[nodiscard]] bool contains(const FpSubspace& other) const {
    for (std::size_t r = 0; r < other.dimension(); ++r) {
      if (!contains(other.basis_.row(r))) return false;
    }
    return true;
  }

  [[nodiscard]] bool is_t_stable() const {
    for (std::size_t r = 0; r < dimension(); ++r) {
      if (!contains(apply_t(shape_, basis_.row(r)))) return false;
    }
    return true;
  }

  [[nodiscard]] FpSubspace sum(const FpSubspace& other) const { return span(shape_, basis_.stacked(other.basis_)); }
  [[nodiscard]] FpSubspace intersection(const FpSubspace& other) const {
    return FpSubspace(shape_, intersect_row_spaces(basis_, other.basis_));
  }

  friend bool operator==(const FpSubspace&, const FpSubspace&) = default;

 private:
  FpSubspace(SpaceShape shape, FpMatrix basis) : shape_(std::move(shape)), basis_(std::move(basis)) {}

  SpaceShape shape_;
  FpMatrix basis_;
};

/// M^perp = {y : (m, y) = 0 for all m in M}.
[[nodiscard]] inline FpSubspace orthogonal_complement(const FpSubspace& m, const PairingOperator& op) {
  if (!(op.shape() == m.shape())) throw structural_error("pairing operator built for a different shape");
  FpMatrix functionals(m.shape().prime(), 0, m.shape().dimension());
  for (std::size_t r = 0; r < m.dimension(); ++r) functionals.append_row(op.functional(m.basis().row(r)));
  return FpSubspace::span(m.shape(), functionals.kernel());
}

[[nodiscard]] inline FpSubspace orthogonal_complement(const FpSubspace& m) {
  return orthogonal_complement(m, PairingOperator(m.shape()));
}

[[nodiscard]] inline bool is_isotropic(const FpSubspace& m) { return orthogonal_complement(m).contains(m); }

[[nodiscard]] inline bool is_maximal_isotropic(const FpSubspace& m) { return orthogonal_complement(m) == m; }

/// How a maximal isotropic W sits relative to the rank/torsion splitting.
struct IsotropicDiagnostics {
  std::size_t rank_projection_dim = 0;     ///< dim of W projected onto the (a, b) block
  std::size_t rank_intersection_dim = 0;   ///< dim of W cap (a, b) block
  std::size_t torsion_intersection_dim = 0;
  bool rank_part_cyclic = false;           ///< W cap (a, b) block is a cyclic Omega-module
  bool rank_part_free = false;             ///< ... and isomorphic to Omega_n
  /// W = (cyclic submodule of the rank block) (+) (W cap torsion part).
  bool decomposes = false;
};

struct MaximalIsotropic {
  FpSubspace subspace;
  IsotropicDiagnostics diagnostics;
};

[[nodiscard]] inline IsotropicDiagnostics isotropic_diagnostics(const FpSubspace& w) {
  const SpaceShape& shape = w.shape();
  const std::size_t rank_dim = shape.rank_part_dimension();
  const std::size_t dim = shape.dimension();

  FpMatrix rank_coordinates(shape.prime(), 0, dim);
  FpMatrix torsion_coordinates(shape.prime(), 0, dim);
  std::vector<residue> e(dim, 0);
  for (std::size_t i = 0; i < dim; ++i) {
    std::fill(e.begin(), e.end(), 0);
    e[i] = 1;
    (i < rank_dim ? rank_coordinates : torsion_coordinates).append_row(e);
  }
  const FpSubspace rank_part = FpSubspace::span(shape, rank_coordinates);
  const FpSubspace torsion_part = FpSubspace::span(shape, torsion_coordinates);

  IsotropicDiagnostics d;
  FpMatrix projected(shape.prime(), 0, dim);
  for (std::size_t r = 0; r < w.dimension(); ++r) {
    auto v = w.basis().row_vector(r);
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(rank_dim), v.end(), 0);
    projected.append_row(v);
  }
  d.rank_projection_dim = projected.rank();

  const FpSubspace in_rank = w.intersection(rank_part);
  const FpSubspace in_torsion = w.intersection(torsion_part);
  d.rank_intersection_dim = in_rank.dimension();
  d.torsion_intersection_dim = in_torsion.dimension();

  // Minimal generator count of a T-stable subspace U is dim U - dim T U.
  FpMatrix t_image(shape.prime(), 0, dim);
  for (std::size_t r = 0; r < in_rank.dimension(); ++r) t_image.append_row(apply_t(shape, in_rank.basis().row(r)));
  const std::size_t generators = in_rank.dimension() - t_image.rank();
  d.rank_part_cyclic = generators <= 1;
  d.rank_part_free = generators == 1 && in_rank.dimension() == static_cast<std::size_t>(shape.rank_level());
  d.decomposes = d.rank_part_cyclic && d.rank_intersection_dim + d.torsion_intersection_dim == w.dimension();
  return d;
}

/// Every T-stable subspace W with W = W^perp, in a deterministic order.
///
/// Depth-first search over isotropic submodules: from an isotropic
/// submodule M, every isotropic submodule strictly containing it is reached by
/// adjoining the Omega-span of some v in M^perp outside M, and v only matters
/// up to M and up to F_p^x scaling.
[[nodiscard]] inline std::vector<MaximalIsotropic> enumerate_maximal_isotropic(const SpaceShape& shape) {
  const std::size_t dim = shape.dimension();
  if (dim > kMaxIsotropicEnumerationDimension) {
    throw resource_error("isotropic enumeration is bounded to dimension " +
                         std::to_string(kMaxIsotropicEnumerationDimension) + ", got " + std::to_string(dim));
  }
  const PrimeParam p = shape.prime();
  const PairingOperator op(shape);

  auto key_of = [](const FpSubspace& s) {
    std::vector<residue> key;
    for (std::size_t r = 0; r < s.dimension(); ++r) key.insert(key.end(), s.basis().row(r).begin(), s.basis().row(r).end());
    return key;
  };

  std::set<std::vector<residue>> visited;
  std::map<std::vector<residue>, FpSubspace> found;
  std::vector<FpSubspace> stack{FpSubspace::zero(shape)};
  visited.insert(key_of(stack.back()));

  while (!stack.empty()) {
    const FpSubspace m = std::move(stack.back());
    stack.pop_back();
    const FpSubspace perp = orthogonal_complement(m, op);

    // Directions of perp not already in m.
    FpMatrix extended = m.basis();
    std::vector<std::vector<residue>> directions;
    for (std::size_t r = 0; r < perp.dimension(); ++r) {
      auto rest = reduce_against(extended, perp.basis().row_vector(r));
      if (std::ranges::all_of(rest, [](residue c) { return c == 0; })) continue;
      directions.push_back(perp.basis().row_vector(r));
      extended.append_row(rest);
      extended.reduce();
    }

    const std::size_t r = directions.size();
    for (std::size_t lead = 0; lead < r; ++lead) {
      std::uint64_t tails = 1;
      for (std::size_t i = lead + 1; i < r; ++i) tails *= p.value();
      for (std::uint64_t t = 0; t < tails; ++t) {
        std::vector<residue> v = directions[lead];
        std::uint64_t digits = t;
        for (std::size_t i = lead + 1; i < r; ++i, digits /= p.value()) {
          const auto c = static_cast<residue>(digits % p.value());
          if (c == 0) continue;
          for (std::size_t k = 0; k < dim; ++k) v[k] = p.add(v[k], p.mul(c, directions[i][k]));
        }
        FpMatrix gens = m.basis();
        gens.append_row(v);
        FpSubspace next = FpSubspace::t_closure(shape, gens);
        auto key = key_of(next);
        if (visited.contains(key)) continue;
        visited.insert(key);
        if (!orthogonal_complement(next, op).contains(next)) continue;
        if (2 * next.dimension() == dim) {
          found.emplace(std::move(key), std::move(next));
        } else {
          stack.push_back(std::move(next));
        }
      }
    }
  }

  std::vector<MaximalIsotropic> out;
  out.reserve(found.size());
  for (auto& [key, subspace] : found) {
    auto diagnostics = isotropic_diagnostics(subspace);
    out.push_back({std::move(subspace), diagnostics});
  }
  return out;
}

}  // namespace omega
