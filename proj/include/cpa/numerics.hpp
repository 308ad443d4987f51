#pragma once

// Dense complex polynomial arithmetic and small dense complex linear algebra.
//
// Everything here works in double precision at "desk scale": polynomial
// degrees up to a few dozen and matrices with at most a few dozen rows and
// columns. Tolerances are fixed constants rather than tuning knobs.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace cpa {

using CScalar = std::complex<double>;
using CVector = std::vector<CScalar>;

/// Dense polynomial, coefficient i multiplies z^i.
///
/// The zero polynomial is stored as the single coefficient 0 and reports
/// degree() == -1. Trailing exact zeros are kept as given; degree() skips
/// them, so a Poly built from {1, 0, 0} still has degree 0.
class Poly {
 public:
  Poly() : coeffs_{CScalar{0.0}} {}
  explicit Poly(CVector coeffs);
  Poly(std::initializer_list<CScalar> coeffs) : Poly(CVector(coeffs)) {}

  static Poly constant(CScalar c) { return Poly({c}); }
  /// Monic polynomial prod_i (z - roots[i]).
  static Poly from_roots(std::span<const CScalar> roots);

  const CVector& coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  CScalar operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : CScalar{0.0}; }

  /// Highest index with a nonzero coefficient, or -1 for the zero polynomial.
  int degree() const noexcept;
  bool is_zero() const noexcept { return degree() < 0; }
  /// Coefficient at degree(); zero for the zero polynomial.
  CScalar leading() const noexcept;
  /// Largest coefficient magnitude.
  double max_abs_coeff() const noexcept;

  /// Drops coefficients above degree().
  Poly trimmed() const;
  Poly scaled(CScalar factor) const;

  CScalar operator()(CScalar z) const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);

 private:
  CVector coeffs_;
};

/// outer(inner(z)), expanded in coefficient form.
Poly compose(const Poly& outer, const Poly& inner);

/// Horner evaluation, highest coefficient first.
CScalar poly_eval(const Poly& p, CScalar z);

/// Unique polynomial of degree <= m-1 through m points with distinct
/// abscissae. Built from barycentric weights and stored in coefficient form.
/// Throws DuplicateNodes when two abscissae are closer than 1e-12 * (1 + max|x|).
Poly lagrange_interpolate(std::span<const CScalar> xs, std::span<const CScalar> ys);
Poly lagrange_interpolate(std::span<const std::pair<CScalar, CScalar>> points);

/// Throws DuplicateNodes when two abscissae are closer than 1e-12 * (1 + max|x|).
void require_distinct_nodes(std::span<const CScalar> xs);

/// Barycentric weights 1 / prod_{j != i} (x_i - x_j).
CVector barycentric_weights(std::span<const CScalar> xs);

/// Evaluates the interpolant through (xs, ys) at z without forming
/// coefficients: l(z) * sum_i weights_i ys_i / (z - xs_i) with
/// l(z) = prod_i (z - xs_i). Unlike the normalized (second-form) variant this
/// stays accurate when z lies far outside the nodes, which is where encoding
/// and decoding usually evaluate. Returns ys_i exactly at z == xs_i.
CScalar barycentric_eval(std::span<const CScalar> xs, std::span<const CScalar> ys,
                         std::span<const CScalar> weights, CScalar z);

/// All degree(p) roots by Durand-Kerner (Weierstrass) simultaneous iteration.
/// Throws DegenerateLeading if |leading| <= 1e-12 * max|coeff| or degree < 1,
/// NoConvergence if the largest update is still above 1e-14 * (1 + |z|)
/// after 1000 sweeps.
CVector poly_roots(const Poly& p);

struct DivisionResult {
  Poly quotient;
  Poly remainder;
};

/// num = den * quotient + remainder with degree(remainder) < degree(den).
DivisionResult poly_divide(const Poly& num, const Poly& den);

/// Row-major dense complex matrix.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols, CScalar fill = CScalar{0.0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CMatrix(std::initializer_list<std::initializer_list<CScalar>> rows);

  static CMatrix identity(std::size_t n);
  static CMatrix scalar(CScalar value) { return CMatrix(1, 1, value); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool same_shape(const CMatrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  CScalar& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  CScalar operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<CScalar> data() noexcept { return data_; }
  std::span<const CScalar> data() const noexcept { return data_; }

  /// Max absolute row sum.
  double norm_inf() const noexcept;
  double norm_frobenius() const noexcept;
  double max_abs() const noexcept;

  /// Columns [first, first + count).
  CMatrix col_block(std::size_t first, std::size_t count) const;
  /// Rows listed in `indices`, in that order.
  CMatrix select_rows(std::span<const std::size_t> indices) const;

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);
  friend CVector operator*(const CMatrix& a, std::span<const CScalar> x);
  friend CMatrix operator-(const CMatrix& a, const CMatrix& b);
  friend CMatrix operator+(const CMatrix& a, const CMatrix& b);
  friend bool operator==(const CMatrix& a, const CMatrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  CVector data_;
};

/// Null-space basis by reduction to row echelon form with partial pivoting.
/// Columns whose best pivot falls below 1e-12 * (largest column 2-norm) are
/// treated as dependent. One basis vector per free column, with a 1 in that
/// column. An empty result means the kernel is trivial.
std::vector<CVector> kernel_basis(const CMatrix& m);

/// Pivot count under the same policy as kernel_basis.
std::size_t matrix_rank(const CMatrix& m);

/// Determinant of a square matrix via LU with partial pivoting.
CScalar determinant(const CMatrix& m);

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Throws InvalidParams when the matrix is not square or is singular.
CVector solve_linear(const CMatrix& a, std::span<const CScalar> b);

double max_abs(std::span<const CScalar> v) noexcept;

}  // namespace cpa
