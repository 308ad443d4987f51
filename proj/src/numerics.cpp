#include "cpa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cpa/error.hpp"

namespace cpa {

namespace {

constexpr double kNodeSeparation = 1e-12;
constexpr double kLeadingThreshold = 1e-12;
constexpr double kRootUpdateTolerance = 1e-14;
constexpr int kRootMaxSweeps = 1000;
constexpr double kPivotThreshold = 1e-12;

// Divides p by (z - root), dropping the remainder. p has ascending coefficients.
CVector deflate(const CVector& p, CScalar root) {
  CVector q(p.size() - 1);
  CScalar carry{0.0};
  for (std::size_t i = p.size() - 1; i > 0; --i) {
    carry = p[i] + carry * root;
    q[i - 1] = carry;
  }
  return q;
}

struct Reduction {
  CMatrix echelon;
  std::vector<std::size_t> pivot_cols;
};

// Gauss-Jordan reduction with partial pivoting; every pivot row is scaled to 1
// and its column is cleared above and below.
Reduction reduce(const CMatrix& m) {
  Reduction out{m, {}};
  CMatrix& r = out.echelon;
  const std::size_t rows = r.rows();
  const std::size_t cols = r.cols();

  double max_col_norm = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += std::norm(r(i, c));
    max_col_norm = std::max(max_col_norm, std::sqrt(s));
  }
  const double threshold = kPivotThreshold * max_col_norm;
  if (max_col_norm == 0.0) return out;

  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < rows; ++c) {
    std::size_t best = row;
    for (std::size_t i = row + 1; i < rows; ++i) {
      if (std::abs(r(i, c)) > std::abs(r(best, c))) best = i;
    }
    if (std::abs(r(best, c)) <= threshold) continue;
    if (best != row) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(r(row, j), r(best, j));
    }
    const CScalar inv = 1.0 / r(row, c);
    for (std::size_t j = 0; j < cols; ++j) r(row, j) *= inv;
    r(row, c) = 1.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == row) continue;
      const CScalar f = r(i, c);
      if (f == CScalar{0.0}) continue;
      for (std::size_t j = 0; j < cols; ++j) r(i, j) -= f * r(row, j);
      r(i, c) = 0.0;
    }
    out.pivot_cols.push_back(c);
    ++row;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(CVector coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(CScalar{0.0});
}

Poly Poly::from_roots(std::span<const CScalar> roots) {
  CVector c{CScalar{1.0}};
  c.reserve(roots.size() + 1);
  for (CScalar r : roots) {
    c.push_back(CScalar{0.0});
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] = c[i - 1] - r * c[i];
    c[0] = -r * c[0];
  }
  return Poly(std::move(c));
}

int Poly::degree() const noexcept {
  for (std::size_t i = coeffs_.size(); i > 0; --i) {
    if (std::abs(coeffs_[i - 1]) > 0.0) return static_cast<int>(i - 1);
  }
  return -1;
}

CScalar Poly::leading() const noexcept {
  int deg = degree();
  return deg < 0 ? CScalar{0.0} : coeffs_[static_cast<std::size_t>(deg)];
}

double Poly::max_abs_coeff() const noexcept { return max_abs(coeffs_); }

Poly Poly::trimmed() const {
  int deg = degree();
  if (deg < 0) return Poly{};
  return Poly(CVector(coeffs_.begin(), coeffs_.begin() + deg + 1));
}

Poly Poly::scaled(CScalar factor) const {
  CVector c = coeffs_;
  for (auto& x : c) x *= factor;
  return Poly(std::move(c));
}

CScalar Poly::operator()(CScalar z) const { return poly_eval(*this, z); }

Poly operator+(const Poly& a, const Poly& b) {
  CVector c(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
  return Poly(std::move(c));
}

Poly operator-(const Poly& a, const Poly& b) {
  CVector c(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] - b[i];
  return Poly(std::move(c));
}

Poly operator*(const Poly& a, const Poly& b) {
  CVector c(a.size() + b.size() - 1, CScalar{0.0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a.coeffs()[i] * b.coeffs()[j];
  }
  return Poly(std::move(c));
}

Poly compose(const Poly& outer, const Poly& inner) {
  const Poly f = outer.trimmed();
  Poly acc = Poly::constant(f.coeffs().back());
  for (std::size_t i = f.size() - 1; i > 0; --i) {
    acc = acc * inner + Poly::constant(f.coeffs()[i - 1]);
  }
  return acc;
}

CScalar poly_eval(const Poly& p, CScalar z) {
  const CVector& c = p.coeffs();
  CScalar acc = c.back();
  for (std::size_t i = c.size() - 1; i > 0; --i) acc = acc * z + c[i - 1];
  return acc;
}

// ---------------------------------------------------------------------------
// Interpolation

void require_distinct_nodes(std::span<const CScalar> xs) {
  const double scale = 1.0 + max_abs(xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (std::abs(xs[i] - xs[j]) <= kNodeSeparation * scale) {
        throw Error(ErrorCode::DuplicateNodes,
                    "interpolation nodes " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

CVector barycentric_weights(std::span<const CScalar> xs) {
  CVector w(xs.size(), CScalar{1.0});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (i != j) w[i] *= (xs[i] - xs[j]);
    }
    w[i] = 1.0 / w[i];
  }
  return w;
}

CScalar barycentric_eval(std::span<const CScalar> xs, std::span<const CScalar> ys,
                         std::span<const CScalar> weights, CScalar z) {
  CScalar node_poly{1.0};
  CScalar sum{0.0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const CScalar diff = z - xs[i];
    if (diff == CScalar{0.0}) return ys[i];
    node_poly *= diff;
    sum += weights[i] * ys[i] / diff;
  }
  return node_poly * sum;
}

Poly lagrange_interpolate(std::span<const CScalar> xs, std::span<const CScalar> ys) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw Error(ErrorCode::InvalidParams, "interpolation needs matching, nonempty node and value lists");
  }
  require_distinct_nodes(xs);

  const CVector weights = barycentric_weights(xs);
  const CVector node_poly = Poly::from_roots(xs).coeffs();

  CVector coeffs(xs.size(), CScalar{0.0});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const CScalar scale = ys[i] * weights[i];
    if (scale == CScalar{0.0}) continue;
    const CVector basis = deflate(node_poly, xs[i]);
    for (std::size_t j = 0; j < basis.size(); ++j) coeffs[j] += scale * basis[j];
  }
  return Poly(std::move(coeffs));
}

Poly lagrange_interpolate(std::span<const std::pair<CScalar, CScalar>> points) {
  CVector xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (const auto& [x, y] : points) {
    xs.push_back(x);
    ys.push_back(y);
  }
  return lagrange_interpolate(xs, ys);
}

// ---------------------------------------------------------------------------
// Roots

CVector poly_roots(const Poly& p) {
  const Poly q = p.trimmed();
  const int deg = q.degree();
  if (deg < 1) throw Error(ErrorCode::DegenerateLeading, "root finding needs degree >= 1");
  if (std::abs(q.leading()) <= kLeadingThreshold * q.max_abs_coeff()) {
    throw Error(ErrorCode::DegenerateLeading, "leading coefficient is negligible");
  }

  const auto n = static_cast<std::size_t>(deg);
  const CScalar lead = q.leading();
  CVector monic(n + 1);
  for (std::size_t i = 0; i < n; ++i) monic[i] = q.coeffs()[i] / lead;
  monic[n] = 1.0;
  const Poly mp(monic);

  double radius = 0.0;
  for (std::size_t i = 0; i < n; ++i) radius = std::max(radius, std::abs(monic[i]));
  radius += 1.0;

  CVector z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
    z[k] = std::polar(radius, angle);
  }

  // Magnitude bound on the rounding error of Horner evaluation at z.
  const auto eval_noise = [&](CScalar at) {
    double r = std::abs(at);
    double acc = 0.0;
    for (std::size_t i = n + 1; i > 0; --i) acc = acc * r + std::abs(monic[i - 1]);
    return 4.0 * static_cast<double>(n + 1) * std::numeric_limits<double>::epsilon() * acc;
  };

  for (int sweep = 0; sweep < kRootMaxSweeps; ++sweep) {
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const CScalar value = poly_eval(mp, z[k]);
      // A value at the evaluation noise floor carries no direction; the root
      // estimate cannot be improved further in double precision.
      if (std::abs(value) <= eval_noise(z[k])) continue;
      CScalar denom{1.0};
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) denom *= (z[k] - z[j]);
      }
      if (denom == CScalar{0.0}) denom = CScalar{std::numeric_limits<double>::epsilon(), 0.0};
      const CScalar step = value / denom;
      z[k] -= step;
      worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[k])));
    }
    if (worst <= kRootUpdateTolerance) return z;
  }
  throw Error(ErrorCode::NoConvergence,
              "Durand-Kerner did not converge in " + std::to_string(kRootMaxSweeps) + " sweeps");
}

// ---------------------------------------------------------------------------
// Division

DivisionResult poly_divide(const Poly& num, const Poly& den) {
  const Poly d = den.trimmed();
  const int m = d.degree();
  if (m < 0) throw Error(ErrorCode::ZeroDivisor, "division by the zero polynomial");

  const Poly n_poly = num.trimmed();
  const int n = n_poly.degree();
  if (n < m) return {Poly{}, n_poly};

  CVector rem = n_poly.coeffs();
  CVector quot(static_cast<std::size_t>(n - m + 1), CScalar{0.0});
  const auto um = static_cast<std::size_t>(m);
  const CScalar lead = d.leading();
  for (std::size_t k = quot.size(); k > 0; --k) {
    const std::size_t shift = k - 1;
    const CScalar qk = rem[um + shift] / lead;
    quot[shift] = qk;
    for (std::size_t j = 0; j < um; ++j) rem[j + shift] -= qk * d.coeffs()[j];
    rem[um + shift] = 0.0;
  }
  rem.resize(std::max<std::size_t>(um, 1));
  if (um == 0) rem[0] = 0.0;
  return {Poly(std::move(quot)), Poly(std::move(rem))};
}

// ---------------------------------------------------------------------------
// CMatrix

CMatrix::CMatrix(std::initializer_list<std::initializer_list<CScalar>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double CMatrix::norm_inf() const noexcept {
  double best = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += std::abs((*this)(r, c));
    best = std::max(best, s);
  }
  return best;
}

double CMatrix::norm_frobenius() const noexcept {
  double s = 0.0;
  for (CScalar x : data_) s += std::norm(x);
  return std::sqrt(s);
}

double CMatrix::max_abs() const noexcept { return cpa::max_abs(data_); }

CMatrix CMatrix::col_block(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw Error(ErrorCode::DimensionMismatch, "column block out of range");
  CMatrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = (*this)(r, first + c);
  }
  return out;
}

CMatrix CMatrix::select_rows(std::span<const std::size_t> indices) const {
  CMatrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw Error(ErrorCode::DimensionMismatch, "row index out of range");
    for (std::size_t c = 0; c < cols_; ++c) out(i, c) = (*this)(indices[i], c);
  }
  return out;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matrix product shapes");
  CMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const CScalar aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

CVector operator*(const CMatrix& a, std::span<const CScalar> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector shapes");
  CVector out(a.rows(), CScalar{0.0});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  }
  return out;
}

CMatrix operator-(const CMatrix& a, const CMatrix& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::DimensionMismatch, "matrix difference shapes");
  CMatrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
  return out;
}

CMatrix operator+(const CMatrix& a, const CMatrix& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::DimensionMismatch, "matrix sum shapes");
  CMatrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
  return out;
}

// ---------------------------------------------------------------------------
// Linear algebra

std::vector<CVector> kernel_basis(const CMatrix& m) {
  const Reduction red = reduce(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (std::size_t c : red.pivot_cols) is_pivot[c] = true;

  std::vector<CVector> basis;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    CVector v(m.cols(), CScalar{0.0});
    v[f] = 1.0;
    for (std::size_t r = 0; r < red.pivot_cols.size(); ++r) v[red.pivot_cols[r]] = -red.echelon(r, f);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::size_t matrix_rank(const CMatrix& m) { return reduce(m).pivot_cols.size(); }

CScalar determinant(const CMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "determinant of a non-square matrix");
  CMatrix a = m;
  const std::size_t n = a.rows();
  CScalar det{1.0};
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = c;
    for (std::size_t i = c + 1; i < n; ++i) {
      if (std::abs(a(i, c)) > std::abs(a(best, c))) best = i;
    }
    if (a(best, c) == CScalar{0.0}) return CScalar{0.0};
    if (best != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(best, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      const CScalar f = a(i, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
    }
  }
  return det;
}

CVector solve_linear(const CMatrix& a_in, std::span<const CScalar> b_in) {
  const std::size_t n = a_in.rows();
  if (a_in.cols() != n || b_in.size() != n) {
    throw Error(ErrorCode::InvalidParams, "solve_linear needs a square system");
  }
  CMatrix a = a_in;
  CVector b(b_in.begin(), b_in.end());
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = c;
    for (std::size_t i = c + 1; i < n; ++i) {
      if (std::abs(a(i, c)) > std::abs(a(best, c))) best = i;
    }
    if (a(best, c) == CScalar{0.0}) throw Error(ErrorCode::InvalidParams, "singular system");
    if (best != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(best, j));
      std::swap(b[c], b[best]);
    }
    for (std::size_t i = c + 1; i < n; ++i) {
      const CScalar f = a(i, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
      b[i] -= f * b[c];
    }
  }
  CVector x(n);
  for (std::size_t i = n; i > 0; --i) {
    const std::size_t r = i - 1;
    CScalar s = b[r];
    for (std::size_t j = r + 1; j < n; ++j) s -= a(r, j) * x[j];
    x[r] = s / a(r, r);
  }
  return x;
}

double max_abs(std::span<const CScalar> v) noexcept {
  double m = 0.0;
  for (CScalar x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace cpa
