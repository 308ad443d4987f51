#include <doctest.h>

#include <cmath>

#include "cpa/error.hpp"
#include "cpa/numerics.hpp"
#include "cpa/random.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cpa;

using fixture::code_of;
using fixture::random_matrix;
using fixture::random_vector;

TEST_SUITE("poly_eval") {
  TEST_CASE("root of z^2 - 1") { CHECK(std::abs(poly_eval(Poly({-1.0, 0.0, 1.0}), 1.0)) == 0.0); }

  TEST_CASE("worked example polynomial nearly vanishes at 0.27152") {
    CHECK(std::abs(poly_eval(Poly({-0.0506, 0.0506, 0.5}), 0.27152)) < 1e-4);
  }

  TEST_CASE("matches the naive power sum") {
    const CVector c{2.0, 3.0, 0.0, 1.0};
    const CScalar z{1.0, 1.0};
    const CScalar expected = oracle::power_sum(c, z);
    CHECK(std::abs(poly_eval(Poly(c), z) - expected) < 1e-14);
    // 2 + 3(1+i) + (1+i)^3 = 2 + 3 + 3i - 2 + 2i
    CHECK(std::abs(expected - CScalar(3.0, 5.0)) < 1e-14);

    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
      const CVector cc = random_vector(1 + rng() % 12, rng);
      const CScalar zz = 1.5 * sample_unit_disk(rng);
      CHECK(std::abs(poly_eval(Poly(cc), zz) - oracle::power_sum(cc, zz)) < 1e-12);
    }
  }
}

TEST_SUITE("Poly") {
  TEST_CASE("degree ignores trailing zeros and the zero polynomial is -1") {
    CHECK(Poly({1.0, 0.0, 0.0}).degree() == 0);
    CHECK(Poly().degree() == -1);
    CHECK(Poly().is_zero());
  }

  TEST_CASE("arithmetic agrees with coefficient convolution") {
    Rng rng(3);
    const CVector a = random_vector(4, rng);
    const CVector b = random_vector(3, rng);
    const Poly prod = Poly(a) * Poly(b);
    const CVector expected = oracle::multiply(a, b);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(prod[i] - expected[i]) < 1e-15);
    const Poly diff = Poly(a) - Poly(a);
    CHECK(diff.max_abs_coeff() == 0.0);
  }

  TEST_CASE("from_roots matches one-factor-at-a-time expansion") {
    Rng rng(5);
    const CVector roots = random_vector(6, rng);
    const Poly p = Poly::from_roots(roots);
    const CVector expected = oracle::expand_roots(roots);
    REQUIRE(p.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(p[i] - expected[i]) < 1e-14);
    CHECK(p.leading() == CScalar(1.0));
  }

  TEST_CASE("compose evaluates as outer(inner(z))") {
    const Poly outer{1.0, 0.0, 2.0};
    const Poly inner{0.5, CScalar(0.0, 1.0)};
    const Poly comp = compose(outer, inner);
    for (CScalar z : {CScalar(0.3, -0.2), CScalar(-1.0, 0.7), CScalar(2.0, 0.0)}) {
      CHECK(std::abs(poly_eval(comp, z) - poly_eval(outer, poly_eval(inner, z))) < 1e-13);
    }
  }
}

TEST_SUITE("lagrange_interpolate") {
  TEST_CASE("line through two points") {
    const Poly p = lagrange_interpolate(CVector{0.0, 1.0}, CVector{1.0, 2.0});
    CHECK(std::abs(p[0] - 1.0) < 1e-15);
    CHECK(std::abs(p[1] - 1.0) < 1e-15);
    CHECK(p.degree() == 1);
  }

  TEST_CASE("pair overload through the worked example data points") {
    const std::vector<std::pair<CScalar, CScalar>> pts{{-1.0, 4.0}, {0.0, CScalar(0.0, 2.0)}, {1.0, -3.0}};
    const Poly e = lagrange_interpolate(pts);
    for (const auto& [x, y] : pts) CHECK(std::abs(poly_eval(e, x) - y) < 1e-14);
  }

  TEST_CASE("five random points match a direct Vandermonde solve") {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
      const CVector xs = sample_generic_points(5, rng, 0.05);
      const CVector ys = random_vector(5, rng);
      const Poly p = lagrange_interpolate(xs, ys);
      const CVector expected = oracle::vandermonde_interpolate(xs, ys);
      REQUIRE(expected.size() == 5);
      for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(p[i] - expected[i]) < 1e-8 * (1.0 + std::abs(expected[i])));
    }
  }

  TEST_CASE("duplicate abscissae are rejected") {
    CHECK(code_of([] { lagrange_interpolate(CVector{0.5, 0.5}, CVector{1.0, 2.0}); }) == ErrorCode::DuplicateNodes);
    CHECK(code_of([] { require_distinct_nodes(CVector{1.0, 1.0 + 1e-14}); }) == ErrorCode::DuplicateNodes);
    CHECK_NOTHROW(require_distinct_nodes(CVector{1.0, 1.0 + 1e-6}));
  }

  TEST_CASE("property: interpolate then evaluate reproduces the data") {
    Rng rng(23);
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 1 + rng() % 12;
      const CVector xs = sample_generic_points(n, rng);
      const CVector ys = random_vector(n, rng);
      const Poly p = lagrange_interpolate(xs, ys);
      const double tol = 1e-9 * (1.0 + max_abs(ys));
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(poly_eval(p, xs[i]) - ys[i]) < tol);
    }
  }
}

TEST_SUITE("barycentric_eval") {
  TEST_CASE("matches the Lagrange basis sum inside and far outside the nodes") {
    Rng rng(29);
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 2 + rng() % 10;
      const CVector xs = sample_generic_points(n, rng, 0.05);
      const CVector ys = random_vector(n, rng);
      const CVector w = barycentric_weights(xs);
      for (double radius : {0.5, 3.0}) {
        const CScalar z = radius * sample_unit_disk(rng) + CScalar(0.013, 0.007);
        const CScalar expected = oracle::lagrange_value(xs, ys, z);
        CHECK(std::abs(barycentric_eval(xs, ys, w, z) - expected) < 1e-9 * (1.0 + std::abs(expected)));
      }
    }
  }

  TEST_CASE("returns the data value exactly at a node") {
    const CVector xs{0.0, 1.0, CScalar(0.0, 1.0)};
    const CVector ys{3.0, CScalar(1.0, -2.0), 7.0};
    const CVector w = barycentric_weights(xs);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(barycentric_eval(xs, ys, w, xs[i]) == ys[i]);
  }
}

TEST_SUITE("poly_roots") {
  TEST_CASE("z^2 - 1") {
    const CVector r = poly_roots(Poly({-1.0, 0.0, 1.0}));
    CHECK(oracle::multiset_distance(r, CVector{1.0, -1.0}) < 1e-12);
  }

  TEST_CASE("worked example coefficient vector") {
    const CVector r = poly_roots(Poly({-0.0506, 0.0506, 0.5}));
    CHECK(oracle::multiset_distance(r, CVector{-0.37272, 0.27152}) < 1e-3);
  }

  TEST_CASE("random monic cubic recovers its roots") {
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
      const CVector roots = sample_generic_points(3, rng, 0.05);
      const CVector r = poly_roots(Poly(oracle::expand_roots(roots)));
      CHECK(oracle::multiset_distance(r, roots) < 1e-8);
    }
  }

  TEST_CASE("property: roots then expansion reproduces well-separated polynomials") {
    Rng rng(37);
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 1 + rng() % 10;
      const CVector roots = sample_generic_points(n, rng, 0.05);
      const CVector coeffs = oracle::expand_roots(roots);
      const CVector back = oracle::expand_roots(poly_roots(Poly(coeffs)));
      double scale = 0.0;
      for (CScalar c : coeffs) scale = std::max(scale, std::abs(c));
      for (std::size_t i = 0; i < coeffs.size(); ++i) CHECK(std::abs(back[i] - coeffs[i]) < 1e-8 * scale);
    }
  }

  TEST_CASE("degenerate inputs") {
    CHECK(code_of([] { poly_roots(Poly({1.0})); }) == ErrorCode::DegenerateLeading);
    CHECK(code_of([] { poly_roots(Poly({1.0, 1.0, 1e-20})); }) == ErrorCode::DegenerateLeading);
  }
}

TEST_SUITE("poly_divide") {
  TEST_CASE("exact factor") {
    const DivisionResult r = poly_divide(Poly({-1.0, 0.0, 1.0}), Poly({-1.0, 1.0}));
    CHECK(std::abs(r.quotient[0] - 1.0) < 1e-15);
    CHECK(std::abs(r.quotient[1] - 1.0) < 1e-15);
    CHECK(r.remainder.max_abs_coeff() < 1e-15);
  }

  TEST_CASE("(z^2 + 1) / z") {
    const DivisionResult r = poly_divide(Poly({1.0, 0.0, 1.0}), Poly({0.0, 1.0}));
    CHECK(r.quotient.degree() == 1);
    CHECK(std::abs(r.quotient[1] - 1.0) < 1e-15);
    CHECK(std::abs(r.quotient[0]) < 1e-15);
    CHECK(std::abs(r.remainder[0] - 1.0) < 1e-15);
  }

  TEST_CASE("multiply then divide returns the factor") {
    Rng rng(41);
    for (int t = 0; t < 50; ++t) {
      const CVector p = oracle::expand_roots(random_vector(1 + rng() % 5, rng));
      const CVector rr = random_vector(1 + rng() % 5, rng);
      const DivisionResult r = poly_divide(Poly(oracle::multiply(p, rr)), Poly(p));
      CHECK(r.remainder.max_abs_coeff() < 1e-10);
      for (std::size_t i = 0; i < rr.size(); ++i) CHECK(std::abs(r.quotient[i] - rr[i]) < 1e-10);
    }
  }

  TEST_CASE("property: num = den * q + r with deg r < deg den") {
    Rng rng(43);
    for (int t = 0; t < 1000; ++t) {
      const Poly num(random_vector(1 + rng() % 11, rng));
      CVector dc = random_vector(1 + rng() % 11, rng);
      dc.back() = 0.5 + 0.5 * std::abs(dc.back());
      const Poly den(dc);
      const DivisionResult r = poly_divide(num, den);
      CHECK(r.remainder.degree() < std::max(den.degree(), 1));
      const Poly back = den * r.quotient + r.remainder;
      double err = 0.0;
      for (std::size_t i = 0; i < std::max(back.size(), num.size()); ++i) err = std::max(err, std::abs(back[i] - num[i]));
      CHECK(err < 1e-9 * (1.0 + num.max_abs_coeff()) * (1.0 + r.quotient.max_abs_coeff()));
    }
  }

  TEST_CASE("zero divisor") {
    CHECK(code_of([] { poly_divide(Poly({1.0, 1.0}), Poly()); }) == ErrorCode::ZeroDivisor);
  }
}

TEST_SUITE("linear algebra") {
  TEST_CASE("kernel of [1 1 0] is {(a, -a, b)}") {
    const std::vector<CVector> k = kernel_basis(CMatrix{{1.0, 1.0, 0.0}});
    REQUIRE(k.size() == 2);
    for (const CVector& c : k) CHECK(std::abs(c[0] + c[1]) < 1e-15);
  }

  TEST_CASE("identity has a trivial kernel and full rank") {
    CHECK(kernel_basis(CMatrix::identity(3)).empty());
    CHECK(matrix_rank(CMatrix::identity(4)) == 4);
    CHECK(matrix_rank(CMatrix{{1.0, 1.0, 0.0}}) == 1);
  }

  TEST_CASE("random 3x5: kernel size matches the minor-enumeration rank") {
    Rng rng(47);
    const CMatrix m = random_matrix(3, 5, rng);
    const std::size_t rank = oracle::minor_rank(m);
    const std::vector<CVector> k = kernel_basis(m);
    CHECK(k.size() == 5 - rank);
    for (const CVector& c : k) CHECK(max_abs(m * c) < 1e-12);
  }

  TEST_CASE("random 4x6 rank equals the largest nonvanishing minor") {
    Rng rng(53);
    const CMatrix m = random_matrix(4, 6, rng);
    CHECK(matrix_rank(m) == oracle::minor_rank(m));
  }

  TEST_CASE("property: rank oracle agreement and rank-nullity up to 6x6") {
    Rng rng(59);
    for (int t = 0; t < 300; ++t) {
      const std::size_t rows = 1 + rng() % 6;
      const std::size_t cols = 1 + rng() % 6;
      const std::size_t inner = 1 + rng() % 6;
      // Products of thin factors give rank-deficient matrices.
      const CMatrix m = random_matrix(rows, inner, rng) * random_matrix(inner, cols, rng);
      const std::size_t rank = matrix_rank(m);
      CHECK(rank == oracle::minor_rank(m));
      CHECK(rank <= std::min({rows, cols, inner}));
      CHECK(rank + kernel_basis(m).size() == cols);
    }
  }

  TEST_CASE("determinant agrees with cofactor expansion") {
    Rng rng(61);
    for (std::size_t n = 1; n <= 6; ++n) {
      const CMatrix m = random_matrix(n, n, rng);
      const CScalar expected = oracle::laplace_det(m);
      CHECK(std::abs(determinant(m) - expected) < 1e-12 * (1.0 + std::abs(expected)));
    }
  }

  TEST_CASE("solve_linear agrees with full-pivot elimination") {
    Rng rng(67);
    const CMatrix a = random_matrix(5, 5, rng);
    const CVector b = random_vector(5, rng);
    const CVector x = solve_linear(a, b);
    const CVector expected = oracle::solve_full_pivot(a, b);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(x[i] - expected[i]) < 1e-10 * (1.0 + std::abs(expected[i])));
    CHECK(code_of([] { solve_linear(CMatrix{{1.0, 2.0}, {2.0, 4.0}}, CVector{1.0, 1.0}); }) == ErrorCode::InvalidParams);
  }
}
