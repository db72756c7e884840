#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gphot/matrix.hpp"
#include "gphot/series.hpp"

using gphot::cdouble;
using gphot::make_context;
using gphot::Matrix;
using gphot::Series;

namespace {

Matrix<double> random_matrix(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix<double> m(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(rng);
  return m;
}

double det3_cofactor(const Matrix<double>& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

}  // namespace

TEST_CASE("lu of identity and permutation", "[matrix]") {
  auto f = lu_factor(Matrix<double>::identity(3, 1.0));
  CHECK(f.parity == 1);
  for (int i = 0; i < 3; ++i) CHECK(f.lu(i, i) == 1.0);

  Matrix<double> swap(2, 2, 0.0);
  swap(0, 1) = 1.0;
  swap(1, 0) = 1.0;
  auto fs = lu_factor(swap);
  CHECK(fs.parity == -1);
  CHECK(gphot::determinant(swap) == -1.0);

  Matrix<double> singular(2, 2, 1.0);
  CHECK_THROWS_AS(lu_factor(singular), gphot::singular_error);
}

TEST_CASE("lu residual on random matrices", "[matrix][property]") {
  std::mt19937 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 4;
    Matrix<double> m = random_matrix(n, rng);
    auto f = lu_factor(m);
    // reconstruct P m and L U
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double lu_ij = 0.0;
        for (int k = 0; k <= std::min(i, j); ++k) {
          double l = (k == i) ? 1.0 : (k < i ? f.lu(i, k) : 0.0);
          double u = (k <= j) ? f.lu(k, j) : 0.0;
          lu_ij += l * u;
        }
        CHECK(std::abs(lu_ij - m(f.perm[static_cast<std::size_t>(i)], j)) < 1e-12);
      }
  }
}

TEST_CASE("determinant basics", "[matrix]") {
  CHECK(gphot::determinant(Matrix<double>::identity(3, 1.0)) == 1.0);
  Matrix<double> d(2, 2, 0.0);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  CHECK(gphot::determinant(d) == 6.0);
}

TEST_CASE("det multiplicativity", "[matrix][property]") {
  std::mt19937 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix<double> a = random_matrix(4, rng);
    Matrix<double> b = random_matrix(4, rng);
    double lhs = gphot::determinant(a * b);
    double rhs = gphot::determinant(a) * gphot::determinant(b);
    CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("series determinant against cofactor expansion", "[matrix]") {
  std::mt19937 rng(9);
  auto ctx = make_context({2});
  Series y = variable(ctx, 0);
  Matrix<double> a = random_matrix(3, rng);

  Matrix<Series> m(3, 3, Series(ctx));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Series e = y * cdouble(a(i, j));
      if (i == j) e = e + cdouble(1.0);
      m(i, j) = e;
    }
  Series det = gphot::determinant(m);

  // independent cofactor expansion with scalar series arithmetic
  auto entry = [&](int i, int j) {
    Series e = y * cdouble(a(i, j));
    if (i == j) e = e + cdouble(1.0);
    return e;
  };
  Series cof = entry(0, 0) * (entry(1, 1) * entry(2, 2) - entry(1, 2) * entry(2, 1)) -
               entry(0, 1) * (entry(1, 0) * entry(2, 2) - entry(1, 2) * entry(2, 0)) +
               entry(0, 2) * (entry(1, 0) * entry(2, 1) - entry(1, 1) * entry(2, 0));
  for (int k = 0; k <= 2; ++k)
    CHECK(std::abs(det.coefficient({k}) - cof.coefficient({k})) < 1e-12);

  // standard identity: det(I + sum y_i A_i) = 1 + sum y_i tr(A_i) + O(y^2)
  CHECK(std::abs(det.coefficient({0}) - cdouble(1.0)) < 1e-11);
  double trace = a(0, 0) + a(1, 1) + a(2, 2);
  CHECK(std::abs(det.coefficient({1}) - cdouble(trace)) < 1e-11);
}

TEST_CASE("multivariate determinant linear terms are traces", "[matrix][property]") {
  std::mt19937 rng(29);
  auto ctx = make_context({1, 1});
  Series y0 = variable(ctx, 0), y1 = variable(ctx, 1);
  Matrix<double> a = random_matrix(4, rng), b = random_matrix(4, rng);
  Matrix<Series> m(4, 4, Series(ctx));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Series e = y0 * cdouble(a(i, j)) + y1 * cdouble(b(i, j));
      if (i == j) e = e + cdouble(1.0);
      m(i, j) = e;
    }
  Series det = gphot::determinant(m);
  double tra = 0.0, trb = 0.0;
  for (int i = 0; i < 4; ++i) {
    tra += a(i, i);
    trb += b(i, i);
  }
  CHECK(std::abs(det.coefficient({0, 0}) - cdouble(1.0)) < 1e-11);
  CHECK(std::abs(det.coefficient({1, 0}) - cdouble(tra)) < 1e-11);
  CHECK(std::abs(det.coefficient({0, 1}) - cdouble(trb)) < 1e-11);
}

TEST_CASE("solve basics", "[matrix]") {
  Matrix<double> rhs(2, 1, 0.0);
  rhs(0, 0) = 2.0;
  rhs(1, 0) = 4.0;
  Matrix<double> x = gphot::solve(Matrix<double>::identity(2, 1.0), rhs);
  CHECK(x(0, 0) == 2.0);
  CHECK(x(1, 0) == 4.0);

  Matrix<double> d(2, 2, 0.0);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  x = gphot::solve(d, rhs);
  CHECK(x(0, 0) == 1.0);
  CHECK(x(1, 0) == 1.0);
}

TEST_CASE("series solve residual", "[matrix][property]") {
  std::mt19937 rng(17);
  auto ctx = make_context({3});
  Series y = variable(ctx, 0);
  const int n = 4;
  Matrix<double> a = random_matrix(n, rng);

  Matrix<Series> m(n, n, Series(ctx));
  Matrix<Series> b(n, 1, Series(ctx));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Series e = y * cdouble(a(i, j));
      if (i == j) e = e + cdouble(1.0);
      m(i, j) = e;
    }
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    b(i, 0) = Series(ctx, u(rng)) + y * cdouble(u(rng));
  }
  Matrix<Series> x = gphot::solve(m, b);
  Matrix<Series> back = m * x;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= 3; ++k)
      CHECK(std::abs(back(i, 0).coefficient({k}) - b(i, 0).coefficient({k})) < 1e-11);
}
