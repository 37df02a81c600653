#pragma once

// Dense matrices over F_p with reduced row echelon form, rank and kernels.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omega/errors.hpp"
#include "omega/fp_series.hpp"

namespace omega {

class FpMatrix {
 public:
  FpMatrix(PrimeParam p, std::size_t rows, std::size_t cols) : p_(p), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  /// Builds a matrix from row vectors of equal length `cols`; entries are reduced mod p.
  static FpMatrix from_rows(PrimeParam p, std::size_t cols, const std::vector<std::vector<residue>>& rows) {
    FpMatrix m(p, rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) throw structural_error("row length does not match column count");
      for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rows[r][c] % p.value();
    }
    return m;
  }

  static FpMatrix identity(PrimeParam p, std::size_t n) {
    FpMatrix m(p, n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  [[nodiscard]] PrimeParam prime() const noexcept { return p_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  residue& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  [[nodiscard]] residue at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<const residue> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::vector<residue> row_vector(std::size_t r) const {
    auto s = row(r);
    return {s.begin(), s.end()};
  }

  void append_row(std::span<const residue> values) {
    if (values.size() != cols_) throw structural_error("row length does not match column count");
    for (auto v : values) data_.push_back(v % p_.value());
    ++rows_;
  }

  /// Vertical concatenation.
  [[nodiscard]] FpMatrix stacked(const FpMatrix& below) const {
    if (below.cols_ != cols_ || !(below.p_ == p_)) throw structural_error("cannot stack incompatible matrices");
    FpMatrix out = *this;
    out.data_.insert(out.data_.end(), below.data_.begin(), below.data_.end());
    out.rows_ += below.rows_;
    return out;
  }

  [[nodiscard]] FpMatrix transposed() const {
    FpMatrix out(p_, cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) out.at(c, r) = at(r, c);
    }
    return out;
  }

  friend FpMatrix operator*(const FpMatrix& a, const FpMatrix& b) {
    if (a.cols_ != b.rows_ || !(a.p_ == b.p_)) throw structural_error("matrix dimensions do not agree");
    const std::uint64_t p = a.p_.value();
    FpMatrix out(a.p_, a.rows_, b.cols_);
    std::vector<std::uint64_t> acc(b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r) {
      std::fill(acc.begin(), acc.end(), 0);
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const std::uint64_t v = a.at(r, k);
        if (v == 0) continue;
        for (std::size_t c = 0; c < b.cols_; ++c) acc[c] += v * b.at(k, c);
        // Keep the accumulator bounded for long inner dimensions.
        if ((k & 0xFFFF) == 0xFFFF) {
          for (auto& x : acc) x %= p;
        }
      }
      for (std::size_t c = 0; c < b.cols_; ++c) out.at(r, c) = static_cast<residue>(acc[c] % p);
    }
    return out;
  }

  /// Matrix-vector product.
  [[nodiscard]] std::vector<residue> apply(std::span<const residue> v) const {
    if (v.size() != cols_) throw structural_error("vector length does not match column count");
    std::vector<residue> out(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      std::uint64_t acc = 0;
      for (std::size_t c = 0; c < cols_; ++c) acc += std::uint64_t{at(r, c)} * v[c];
      out[r] = static_cast<residue>(acc % p_.value());
    }
    return out;
  }

  /// Reduced row echelon form with zero rows dropped; returns the pivot columns.
  std::vector<std::size_t> reduce() {
    std::vector<std::size_t> pivots;
    std::size_t lead = 0;
    for (std::size_t c = 0; c < cols_ && lead < rows_; ++c) {
      std::size_t pivot = lead;
      while (pivot < rows_ && at(pivot, c) == 0) ++pivot;
      if (pivot == rows_) continue;
      swap_rows(pivot, lead);
      const residue inv = p_.inv(at(lead, c));
      for (std::size_t j = c; j < cols_; ++j) at(lead, j) = p_.mul(at(lead, j), inv);
      for (std::size_t r = 0; r < rows_; ++r) {
        if (r == lead) continue;
        const residue f = at(r, c);
        if (f == 0) continue;
        for (std::size_t j = c; j < cols_; ++j) at(r, j) = p_.sub(at(r, j), p_.mul(f, at(lead, j)));
      }
      pivots.push_back(c);
      ++lead;
    }
    rows_ = lead;
    data_.resize(rows_ * cols_);
    return pivots;
  }

  [[nodiscard]] FpMatrix rref() const {
    FpMatrix m = *this;
    m.reduce();
    return m;
  }

  [[nodiscard]] std::size_t rank() const { return rref().rows(); }

  /// Basis (as rows, in reduced echelon form) of {x : A x = 0}.
  [[nodiscard]] FpMatrix kernel() const {
    FpMatrix m = *this;
    const auto pivots = m.reduce();
    std::vector<bool> is_pivot(cols_, false);
    for (auto c : pivots) is_pivot[c] = true;
    FpMatrix basis(p_, 0, cols_);
    std::vector<residue> v(cols_);
    for (std::size_t free = 0; free < cols_; ++free) {
      if (is_pivot[free]) continue;
      std::fill(v.begin(), v.end(), 0);
      v[free] = 1;
      for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = p_.neg(m.at(r, free));
      basis.append_row(v);
    }
    basis.reduce();
    return basis;
  }

  friend bool operator==(const FpMatrix&, const FpMatrix&) = default;

 private:
  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap(at(a, c), at(b, c));
  }

  PrimeParam p_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<residue> data_;
};

/// Reduces v against an RREF basis; the result is zero iff v lies in the row space.
[[nodiscard]] inline std::vector<residue> reduce_against(const FpMatrix& rref_basis, std::vector<residue> v) {
  const PrimeParam p = rref_basis.prime();
  for (std::size_t r = 0; r < rref_basis.rows(); ++r) {
    const auto row = rref_basis.row(r);
    std::size_t lead = 0;
    while (lead < row.size() && row[lead] == 0) ++lead;
    if (lead == row.size()) continue;
    const residue f = v[lead];
    if (f == 0) continue;
    for (std::size_t c = lead; c < row.size(); ++c) v[c] = p.sub(v[c], p.mul(f, row[c]));
  }
  return v;
}

/// Basis of the intersection of two row spaces, in reduced echelon form.
[[nodiscard]] inline FpMatrix intersect_row_spaces(const FpMatrix& u, const FpMatrix& w) {
  // (a, b) with a U - b W = 0 gives a U in the intersection.
  const FpMatrix stacked = u.stacked(w);
  const FpMatrix left_kernel = stacked.transposed().kernel();
  FpMatrix out(u.prime(), 0, u.cols());
  for (std::size_t k = 0; k < left_kernel.rows(); ++k) {
    std::vector<residue> v(u.cols(), 0);
    for (std::size_t r = 0; r < u.rows(); ++r) {
      const residue a = left_kernel.at(k, r);
      if (a == 0) continue;
      for (std::size_t c = 0; c < u.cols(); ++c) v[c] = u.prime().add(v[c], u.prime().mul(a, u.at(r, c)));
    }
    out.append_row(v);
  }
  out.reduce();
  return out;
}

}  // namespace omega
