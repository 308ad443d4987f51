#pragma once

#include <doctest.h>

#include "cpa/error.hpp"
#include "cpa/numerics.hpp"
#include "cpa/pipeline.hpp"
#include "cpa/random.hpp"
#include "cpa/scheme.hpp"

namespace fixture {

using namespace cpa;

// K=3 linear worked example: data points -1, 0, 1 and weights -1/2, 1, 1/2.
inline SystemParams example1_params() {
  SystemParams p;
  p.K = 3;
  p.d = 1;
  p.N = 2;
  p.alpha = {-1.0, 0.0, 1.0};
  p.w = {-0.5, 1.0, 0.5};
  return p;
}

inline const CVector& example1_c() {
  static const CVector c{-0.0506, 0.0506, 0.5};
  return c;
}

inline CVector random_vector(std::size_t n, Rng& rng) {
  CVector v(n);
  for (CScalar& x : v) x = sample_unit_disk(rng);
  return v;
}

inline CMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (CScalar& x : m.data()) x = sample_unit_disk(rng);
  return m;
}

inline Dataset scalar_dataset(const CVector& xs) {
  Dataset data;
  for (CScalar x : xs) data.matrices.push_back(CMatrix::scalar(x));
  return data;
}

template <typename Fn>
ErrorCode code_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidParams;
}

}  // namespace fixture
