#pragma once

// Reference computations for the tests. Each one deliberately takes a
// different route from the library code it checks: naive sums instead of
// Horner, cofactor expansion instead of LU, Lagrange basis products instead
// of barycentric weights, full-pivot Gauss-Jordan on the Vandermonde system
// instead of interpolation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "cpa/numerics.hpp"

namespace oracle {

using cpa::CMatrix;
using cpa::CScalar;
using cpa::CVector;

inline CScalar power(CScalar z, std::size_t e) {
  CScalar out{1.0};
  for (std::size_t i = 0; i < e; ++i) out *= z;
  return out;
}

// sum_i c_i z^i with every power formed by repeated multiplication.
inline CScalar power_sum(const CVector& c, CScalar z) {
  CScalar out{0.0};
  for (std::size_t i = 0; i < c.size(); ++i) out += c[i] * power(z, i);
  return out;
}

// Coefficients of prod (z - r_i), multiplying in one linear factor at a time.
inline CVector expand_roots(const CVector& roots) {
  CVector c{1.0};
  for (CScalar r : roots) {
    CVector next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = next;
  }
  return c;
}

inline CVector multiply(const CVector& a, const CVector& b) {
  CVector out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Gauss-Jordan with full pivoting; returns an empty vector if singular.
inline CVector solve_full_pivot(CMatrix a, CVector b) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> col_of(n);
  for (std::size_t i = 0; i < n; ++i) col_of[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = -1.0;
    for (std::size_t r = k; r < n; ++r)
      for (std::size_t c = k; c < n; ++c)
        if (std::abs(a(r, c)) > best) best = std::abs(a(r, c)), pr = r, pc = c;
    if (best <= 0.0) return {};
    for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(pr, c));
    std::swap(b[k], b[pr]);
    for (std::size_t r = 0; r < n; ++r) std::swap(a(r, k), a(r, pc));
    std::swap(col_of[k], col_of[pc]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k) continue;
      const CScalar f = a(r, k) / a(k, k);
      for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
      b[r] -= f * b[k];
    }
  }
  CVector x(n);
  for (std::size_t k = 0; k < n; ++k) x[col_of[k]] = b[k] / a(k, k);
  return x;
}

// Interpolating coefficients by solving the Vandermonde system.
inline CVector vandermonde_interpolate(const CVector& xs, const CVector& ys) {
  CMatrix v(xs.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) v(i, j) = power(xs[i], j);
  return solve_full_pivot(v, ys);
}

// sum_i y_i prod_{j != i} (z - x_j) / (x_i - x_j).
inline CScalar lagrange_value(const CVector& xs, const CVector& ys, CScalar z) {
  CScalar out{0.0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CScalar basis{1.0};
    for (std::size_t j = 0; j < xs.size(); ++j)
      if (j != i) basis *= (z - xs[j]) / (xs[i] - xs[j]);
    out += ys[i] * basis;
  }
  return out;
}

// Cofactor expansion along the first row.
inline CScalar laplace_det(const CMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 0) return 1.0;
  if (n == 1) return m(0, 0);
  CScalar out{0.0};
  for (std::size_t c = 0; c < n; ++c) {
    CMatrix minor(n - 1, n - 1);
    for (std::size_t r = 1; r < n; ++r)
      for (std::size_t cc = 0, k = 0; cc < n; ++cc)
        if (cc != c) minor(r - 1, k++) = m(r, cc);
    out += ((c % 2) ? -1.0 : 1.0) * m(0, c) * laplace_det(minor);
  }
  return out;
}

template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline CMatrix submatrix(const CMatrix& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  CMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

// Largest k with some k x k minor above `tol` (relative to the largest entry
// raised to k).
inline std::size_t minor_rank(const CMatrix& m, double tol = 1e-9) {
  double scale = 0.0;
  for (CScalar x : m.data()) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0;
  std::size_t rank = 0;
  for (std::size_t k = 1; k <= std::min(m.rows(), m.cols()); ++k) {
    bool found = false;
    for_each_subset(m.rows(), k, [&](const std::vector<std::size_t>& rows) {
      if (found) return;
      for_each_subset(m.cols(), k, [&](const std::vector<std::size_t>& cols) {
        if (!found && std::abs(laplace_det(submatrix(m, rows, cols))) > tol * std::pow(scale, double(k))) found = true;
      });
    });
    if (!found) break;
    rank = k;
  }
  return rank;
}

// Largest distance in a greedy nearest matching of two equal-size multisets.
inline double multiset_distance(CVector a, CVector b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (CScalar x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [x](CScalar p, CScalar q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

}  // namespace oracle
