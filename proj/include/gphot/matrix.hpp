/**
 * Copyright 2026 The gphot authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gphot/common.hpp"
#include "gphot/series.hpp"

namespace gphot {

/// Scalar customization for the generic factorizations below. Series pivots
/// are ranked by the magnitude of their constant term: the matrices handled
/// here are well conditioned at the expansion point, so constant-term
/// pivoting inherits that conditioning.
template <typename S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static double zero(const double&) { return 0.0; }
  static double one(const double&) { return 1.0; }
  static double inverse(const double& x) { return 1.0 / x; }
  static double pivot_magnitude(const double& x) { return std::abs(x); }
};

template <>
struct scalar_traits<cdouble> {
  static cdouble zero(const cdouble&) { return 0.0; }
  static cdouble one(const cdouble&) { return 1.0; }
  static cdouble inverse(const cdouble& x) { return 1.0 / x; }
  static double pivot_magnitude(const cdouble& x) { return std::abs(x); }
};

template <>
struct scalar_traits<Series> {
  static Series zero(const Series& proto) { return Series(proto.context()); }
  static Series one(const Series& proto) { return Series(proto.context(), 1.0); }
  static Series inverse(const Series& x) { return reciprocal(x); }
  static double pivot_magnitude(const Series& x) { return std::abs(x.constant_term()); }
};

/// Dense row-major rectangular matrix over double, complex, or Series.
template <typename S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, const S& fill)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static Matrix identity(int n, const S& proto) {
    Matrix m(n, n, scalar_traits<S>::zero(proto));
    for (int i = 0; i < n; ++i) m(i, i) = scalar_traits<S>::one(proto);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  S& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const S& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_, data_.empty() ? S() : scalar_traits<S>::zero(data_[0]));
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw domain_error("matrix product dimension mismatch");
    Matrix r(a.rows_, b.cols_, scalar_traits<S>::zero(a.data_[0]));
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const S& aik = a(i, k);
        for (int j = 0; j < b.cols_; ++j) r(i, j) = r(i, j) + aik * b(k, j);
      }
    return r;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw domain_error("matrix sum dimension mismatch");
    Matrix r = a;
    for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] = r.data_[i] + b.data_[i];
    return r;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw domain_error("matrix difference dimension mismatch");
    Matrix r = a;
    for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] = r.data_[i] - b.data_[i];
    return r;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<S> data_;
};

/// Compact Doolittle factorization P m = L U: `lu` stores U on and above the
/// diagonal and the unit-lower L strictly below it.
template <typename S>
struct LuFactorization {
  Matrix<S> lu;
  std::vector<int> perm;  // row i of the factorization is row perm[i] of m
  int parity = 1;
};

template <typename S>
LuFactorization<S> lu_factor(Matrix<S> m) {
  if (m.rows() != m.cols()) throw domain_error("lu_factor requires a square matrix");
  const int n = m.rows();
  LuFactorization<S> f{std::move(m), {}, 1};
  f.perm.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f.perm[static_cast<std::size_t>(i)] = i;

  for (int k = 0; k < n; ++k) {
    int best = k;
    double best_mag = scalar_traits<S>::pivot_magnitude(f.lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      double mag = scalar_traits<S>::pivot_magnitude(f.lu(i, k));
      if (mag > best_mag) { best = i; best_mag = mag; }
    }
    if (best_mag == 0.0) throw singular_error("structurally singular matrix in lu_factor");
    if (best != k) {
      for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(best, j));
      std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(best)]);
      f.parity = -f.parity;
    }
    const S inv_pivot = scalar_traits<S>::inverse(f.lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      S lik = f.lu(i, k) * inv_pivot;
      f.lu(i, k) = lik;
      for (int j = k + 1; j < n; ++j) f.lu(i, j) = f.lu(i, j) - lik * f.lu(k, j);
    }
  }
  return f;
}

template <typename S>
S determinant(const Matrix<S>& m) {
  if (m.rows() == 0) throw domain_error("determinant of empty matrix");
  auto f = lu_factor(m);
  S det = scalar_traits<S>::one(m(0, 0));
  for (int i = 0; i < m.rows(); ++i) det = det * f.lu(i, i);
  if (f.parity < 0) {
    S z = scalar_traits<S>::zero(det);
    det = z - det;
  }
  return det;
}

template <typename S>
Matrix<S> solve_with_lu(const LuFactorization<S>& f, const Matrix<S>& rhs) {
  const int n = f.lu.rows();
  if (rhs.rows() != n) throw domain_error("solve dimension mismatch");
  Matrix<S> x(n, rhs.cols(), scalar_traits<S>::zero(rhs(0, 0)));
  for (int c = 0; c < rhs.cols(); ++c) {
    // forward substitution with implicit unit diagonal
    for (int i = 0; i < n; ++i) {
      S acc = rhs(f.perm[static_cast<std::size_t>(i)], c);
      for (int j = 0; j < i; ++j) acc = acc - f.lu(i, j) * x(j, c);
      x(i, c) = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
      S acc = x(i, c);
      for (int j = i + 1; j < n; ++j) acc = acc - f.lu(i, j) * x(j, c);
      x(i, c) = acc * scalar_traits<S>::inverse(f.lu(i, i));
    }
  }
  return x;
}

template <typename S>
Matrix<S> solve(const Matrix<S>& m, const Matrix<S>& rhs) {
  return solve_with_lu(lu_factor(m), rhs);
}

}  // namespace gphot
