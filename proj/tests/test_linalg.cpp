#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lp/error.hpp"
#include "lp/linalg.hpp"
#include "lp/rng.hpp"

using namespace lp;
using namespace lp::linalg;

TEST_CASE("matvec") {
  const Matrix m{{1, 2}, {3, 4}};
  CHECK(matvec(m, Vector{1, 1}) == Vector{3, 7});
  const Vector v{0.5, -2, 7};
  CHECK(matvec(Matrix::identity(3), v) == v);
  CHECK(matvec(Matrix(2, 3), v) == Vector{0, 0});
}

TEST_CASE("matvec_transposed") {
  const Matrix m{{1, 2}, {3, 4}};
  CHECK(matvec_transposed(m, Vector{1, 1}) == Vector{4, 6});
  const Vector v{0.25, -1};
  CHECK(matvec_transposed(Matrix::identity(2), v) == v);
  CHECK(matvec_transposed(Matrix{{2}}, Vector{-1}) == Vector{-2});
}

TEST_CASE("matvec_transposed agrees with an explicit transpose") {
  Rng rng(3);
  Matrix m(4, 5);
  for (double& x : m.data()) x = rng.uniform(-1, 1);
  Vector v(4);
  for (double& x : v) x = rng.uniform(-1, 1);
  CHECK(matvec_transposed(m, v) == matvec(transpose(m), v));
}

TEST_CASE("hadamard") {
  CHECK(hadamard(Vector{1, 2}, Vector{3, 4}) == Vector{3, 8});
  CHECK(hadamard(Vector{5, -1}, Vector{0, 0}) == Vector{0, 0});
  CHECK(hadamard(Vector{5, -1}, Vector{1, 1}) == Vector{5, -1});
}

TEST_CASE("outer") {
  CHECK(outer(Vector{1, 2}, Vector{3, 4}) == Matrix{{3, 4}, {6, 8}});
  CHECK(outer(Vector{0, 0}, Vector{3, 4, 5}) == Matrix(2, 3));
  CHECK(outer(Vector{1}, Vector{1}) == Matrix{{1}});

  Matrix acc{{1, 1}, {1, 1}};
  add_outer(acc, -2.0, Vector{1, 2}, Vector{3, 4});
  CHECK(acc == Matrix{{-5, -7}, {-11, -15}});
}

TEST_CASE("reductions") {
  CHECK(dot(Vector{1, 2, 3}, Vector{4, 5, 6}) == 32);
  CHECK(l1_norm(Vector{-1, 2, -3}) == 6);
  CHECK(l2_norm_sq(Vector{3, 4}) == 25);
  Vector y{1, 1};
  axpy(2.0, Vector{1, -1}, y);
  CHECK(y == Vector{3, -1});
  CHECK(scale(0.5, Vector{2, 4}) == Vector{1, 2});
  CHECK(all_finite(Vector{1, 2}));
  CHECK_FALSE(all_finite(Vector{1, std::numeric_limits<double>::quiet_NaN()}));
}

TEST_CASE("shape mismatches throw") {
  CHECK_THROWS_AS(matvec(Matrix(2, 3), Vector{1, 2}), DimensionError);
  CHECK_THROWS_AS(matvec_transposed(Matrix(2, 3), Vector{1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(hadamard(Vector{1}, Vector{1, 2}), DimensionError);
  CHECK_THROWS_AS(dot(Vector{1}, Vector{1, 2}), DimensionError);
}

TEST_CASE("mac counter") {
  reset_mac_count();
  (void)matvec(Matrix(3, 4), Vector(4));
  CHECK(mac_count() == 12);
  (void)matvec_transposed(Matrix(3, 4), Vector(3));
  CHECK(mac_count() == 24);
  Matrix m(2, 2);
  add_outer(m, 1.0, Vector(2), Vector(2));
  CHECK(mac_count() == 28);
  reset_mac_count();
  CHECK(mac_count() == 0);
}
