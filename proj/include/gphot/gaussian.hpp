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

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "gphot/common.hpp"
#include "gphot/matrix.hpp"

namespace gphot {

/// Multimode Gaussian state in the covariance formalism: a real symmetric
/// 2S x 2S covariance matrix gamma in (x_1..x_S, p_1..p_S) ordering with the
/// vacuum normalized to gamma = I, a real displacement vector d, and a copy
/// multiplicity: `copies` identical independent replicas of the block that
/// share the detector assignment (used for broadband SPDC with many equal
/// Schmidt modes).
struct GaussianState {
  int modes = 0;
  Matrix<double> gamma;
  std::vector<double> d;
  int copies = 1;
};

namespace detail {

inline void check_symmetric(const Matrix<double>& g, double tol = 1e-12) {
  for (int i = 0; i < g.rows(); ++i)
    for (int j = i + 1; j < g.cols(); ++j)
      if (std::abs(g(i, j) - g(j, i)) > tol)
        throw physicality_error("covariance matrix not symmetric");
}

// Cholesky-based positive definiteness check (necessary physicality
// condition in this convention).
inline void check_positive_definite(const Matrix<double>& g) {
  const int n = g.rows();
  Matrix<double> l(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = g(i, j);
      for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (sum <= 0.0) throw physicality_error("covariance matrix not positive definite");
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
}

inline void symmetrize(Matrix<double>& g) {
  for (int i = 0; i < g.rows(); ++i)
    for (int j = i + 1; j < g.cols(); ++j) {
      double v = 0.5 * (g(i, j) + g(j, i));
      g(i, j) = v;
      g(j, i) = v;
    }
}

}  // namespace detail

inline void validate(const GaussianState& s) {
  if (s.modes < 1) throw domain_error("state needs at least one mode");
  if (s.copies < 1) throw domain_error("copies must be >= 1");
  if (s.gamma.rows() != 2 * s.modes || s.gamma.cols() != 2 * s.modes ||
      static_cast<int>(s.d.size()) != 2 * s.modes)
    throw domain_error("covariance/displacement dimensions inconsistent");
  detail::check_symmetric(s.gamma);
  detail::check_positive_definite(s.gamma);
}

/// Affine symplectic transformation: quadratures map to s_matrix * q + shift.
struct SymplecticOp {
  Matrix<double> s_matrix;
  std::vector<double> shift;
};

/// Check S^T J S = J for J = [[0, I], [-I, 0]].
inline void validate(const SymplecticOp& op, double tol = 1e-10) {
  const int n2 = op.s_matrix.rows();
  if (n2 % 2 != 0 || op.s_matrix.cols() != n2 ||
      static_cast<int>(op.shift.size()) != n2)
    throw domain_error("symplectic operation dimensions inconsistent");
  const int n = n2 / 2;
  auto j_of = [&](int a, int b) -> double {
    if (a < n && b == a + n) return 1.0;
    if (a >= n && b == a - n) return -1.0;
    return 0.0;
  };
  for (int a = 0; a < n2; ++a)
    for (int b = 0; b < n2; ++b) {
      double acc = 0.0;
      for (int k = 0; k < n2; ++k)
        for (int l = 0; l < n2; ++l)
          acc += op.s_matrix(k, a) * j_of(k, l) * op.s_matrix(l, b);
      if (std::abs(acc - j_of(a, b)) > tol)
        throw physicality_error("matrix does not preserve the symplectic form");
    }
}

// ---------------------------------------------------------------------------
// constructors

inline GaussianState vacuum(int modes) {
  if (modes < 1) throw domain_error("vacuum needs at least one mode");
  GaussianState s;
  s.modes = modes;
  s.gamma = Matrix<double>::identity(2 * modes, 1.0);
  s.d.assign(static_cast<std::size_t>(2 * modes), 0.0);
  return s;
}

inline GaussianState thermal(double mean_photons) {
  if (mean_photons < 0) throw domain_error("thermal mean photon number must be >= 0");
  GaussianState s = vacuum(1);
  s.gamma(0, 0) = s.gamma(1, 1) = 1.0 + 2.0 * mean_photons;
  return s;
}

/// Single-mode displaced squeezed thermal state D(alpha) S(r e^{i theta})
/// rho_th(mu) S^dag D^dag:
///   gamma = (1 + 2 mu) [I cosh 2r + [[cos th, sin th], [sin th, -cos th]] sinh 2r],
///   d = sqrt(2) (Re alpha, Im alpha).
inline GaussianState displaced_squeezed_thermal(cdouble alpha, double r, double theta,
                                                double mean_thermal) {
  if (r < 0) throw domain_error("squeezing magnitude must be >= 0");
  if (mean_thermal < 0) throw domain_error("thermal mean photon number must be >= 0");
  GaussianState s = vacuum(1);
  const double n = 1.0 + 2.0 * mean_thermal;
  const double ch = std::cosh(2.0 * r), sh = std::sinh(2.0 * r);
  s.gamma(0, 0) = n * (ch + std::cos(theta) * sh);
  s.gamma(0, 1) = s.gamma(1, 0) = n * std::sin(theta) * sh;
  s.gamma(1, 1) = n * (ch - std::cos(theta) * sh);
  s.d[0] = std::sqrt(2.0) * alpha.real();
  s.d[1] = std::sqrt(2.0) * alpha.imag();
  return s;
}

inline GaussianState coherent(cdouble alpha) {
  return displaced_squeezed_thermal(alpha, 0.0, 0.0, 0.0);
}

inline GaussianState squeezed(double r, double theta) {
  return displaced_squeezed_thermal(0.0, r, theta, 0.0);
}

// ---------------------------------------------------------------------------
// symplectic building blocks

/// Lossless beam splitter on modes (i, j), acting identically on the x and p
/// blocks as [[sqrt(T), sqrt(1-T)], [-sqrt(1-T), sqrt(T)]]. T = 1 is the
/// identity. This sign convention is fixed project-wide.
inline SymplecticOp beamsplitter(int modes, int i, int j, double transmission) {
  if (i < 0 || j < 0 || i >= modes || j >= modes || i == j)
    throw domain_error("invalid beam splitter mode indices");
  if (transmission < 0.0 || transmission > 1.0)
    throw domain_error("beam splitter transmission must be in [0, 1]");
  const double t = std::sqrt(transmission);
  const double rr = std::sqrt(1.0 - transmission);
  SymplecticOp op{Matrix<double>::identity(2 * modes, 1.0),
                  std::vector<double>(static_cast<std::size_t>(2 * modes), 0.0)};
  for (int block = 0; block < 2; ++block) {
    const int a = i + block * modes, b = j + block * modes;
    op.s_matrix(a, a) = t;
    op.s_matrix(a, b) = rr;
    op.s_matrix(b, a) = -rr;
    op.s_matrix(b, b) = t;
  }
  return op;
}

/// Phase shift on mode i: x' = x cos phi + p sin phi, p' = -x sin phi + p cos phi.
inline SymplecticOp phase_shift(int modes, int i, double phi) {
  if (i < 0 || i >= modes) throw domain_error("invalid phase shift mode index");
  SymplecticOp op{Matrix<double>::identity(2 * modes, 1.0),
                  std::vector<double>(static_cast<std::size_t>(2 * modes), 0.0)};
  const double c = std::cos(phi), s = std::sin(phi);
  op.s_matrix(i, i) = c;
  op.s_matrix(i, i + modes) = s;
  op.s_matrix(i + modes, i) = -s;
  op.s_matrix(i + modes, i + modes) = c;
  return op;
}

/// Two-mode squeezer exp(r e^{i theta} a_i^dag a_j^dag - h.c.) on modes (i, j).
inline SymplecticOp two_mode_squeezer(int modes, int i, int j, double r, double theta) {
  if (i < 0 || j < 0 || i >= modes || j >= modes || i == j)
    throw domain_error("invalid two-mode squeezer mode indices");
  if (r < 0) throw domain_error("squeezing magnitude must be >= 0");
  SymplecticOp op{Matrix<double>::identity(2 * modes, 1.0),
                  std::vector<double>(static_cast<std::size_t>(2 * modes), 0.0)};
  const double c = std::cosh(r), s = std::sinh(r);
  const double ct = std::cos(theta), st = std::sin(theta);
  const int xi = i, xj = j, pi_ = i + modes, pj = j + modes;
  // x_i' = c x_i + s(ct x_j + st p_j); p_i' = c p_i + s(st x_j - ct p_j), i <-> j
  op.s_matrix(xi, xi) = c;   op.s_matrix(xi, xj) = s * ct;  op.s_matrix(xi, pj) = s * st;
  op.s_matrix(xj, xj) = c;   op.s_matrix(xj, xi) = s * ct;  op.s_matrix(xj, pi_) = s * st;
  op.s_matrix(pi_, pi_) = c; op.s_matrix(pi_, xj) = s * st; op.s_matrix(pi_, pj) = -s * ct;
  op.s_matrix(pj, pj) = c;   op.s_matrix(pj, xi) = s * st;  op.s_matrix(pj, pi_) = -s * ct;
  return op;
}

/// Pure displacement of mode i by alpha.
inline SymplecticOp displacement(int modes, int i, cdouble alpha) {
  if (i < 0 || i >= modes) throw domain_error("invalid displacement mode index");
  SymplecticOp op{Matrix<double>::identity(2 * modes, 1.0),
                  std::vector<double>(static_cast<std::size_t>(2 * modes), 0.0)};
  op.shift[static_cast<std::size_t>(i)] = std::sqrt(2.0) * alpha.real();
  op.shift[static_cast<std::size_t>(i + modes)] = std::sqrt(2.0) * alpha.imag();
  return op;
}

// ---------------------------------------------------------------------------
// state transformations

/// gamma' = S gamma S^T (re-symmetrized), d' = S d + shift. Acts within one
/// copy block; the copy multiplicity replicates it implicitly.
inline GaussianState apply(const SymplecticOp& op, const GaussianState& state) {
  if (op.s_matrix.rows() != 2 * state.modes)
    throw domain_error("symplectic operation does not match state dimension");
  GaussianState out = state;
  out.gamma = op.s_matrix * state.gamma * op.s_matrix.transposed();
  detail::symmetrize(out.gamma);
  const int n2 = 2 * state.modes;
  out.d.assign(static_cast<std::size_t>(n2), 0.0);
  for (int i = 0; i < n2; ++i) {
    double acc = op.shift[static_cast<std::size_t>(i)];
    for (int j = 0; j < n2; ++j) acc += op.s_matrix(i, j) * state.d[static_cast<std::size_t>(j)];
    out.d[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

/// Two-mode squeezed vacuum with mean photon number sinh^2(r) per arm.
inline GaussianState tmsv(double r, double theta = 0.0) {
  return apply(two_mode_squeezer(2, 0, 1, r, theta), vacuum(2));
}

/// Tensor product: block-diagonal gamma (reordered to x..x p..p), concatenated d.
inline GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  if (a.copies != b.copies) throw domain_error("tensor requires equal copy multiplicity");
  const int sa = a.modes, sb = b.modes, s = sa + sb;
  GaussianState out;
  out.modes = s;
  out.copies = a.copies;
  out.gamma = Matrix<double>(2 * s, 2 * s, 0.0);
  out.d.assign(static_cast<std::size_t>(2 * s), 0.0);
  // index maps old quadrature index -> new quadrature index
  auto map_a = [&](int q) { return q < sa ? q : q - sa + s; };
  auto map_b = [&](int q) { return q < sb ? q + sa : q - sb + s + sa; };
  for (int i = 0; i < 2 * sa; ++i) {
    out.d[static_cast<std::size_t>(map_a(i))] = a.d[static_cast<std::size_t>(i)];
    for (int j = 0; j < 2 * sa; ++j) out.gamma(map_a(i), map_a(j)) = a.gamma(i, j);
  }
  for (int i = 0; i < 2 * sb; ++i) {
    out.d[static_cast<std::size_t>(map_b(i))] = b.d[static_cast<std::size_t>(i)];
    for (int j = 0; j < 2 * sb; ++j) out.gamma(map_b(i), map_b(j)) = b.gamma(i, j);
  }
  return out;
}

/// Transmission T through a beam splitter to an auxiliary vacuum mode that is
/// traced out: the (x_i, p_i) block maps to T block + (1 - T) I, couplings to
/// other modes scale by sqrt(T), d_i by sqrt(T).
inline GaussianState loss_channel(const GaussianState& state, int mode, double transmission) {
  if (mode < 0 || mode >= state.modes) throw domain_error("invalid loss channel mode");
  if (transmission < 0.0 || transmission > 1.0)
    throw domain_error("loss transmission must be in [0, 1]");
  GaussianState out = state;
  const double st = std::sqrt(transmission);
  const int n2 = 2 * state.modes;
  auto touches = [&](int q) { return q == mode || q == mode + state.modes; };
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j) {
      double f = (touches(i) ? st : 1.0) * (touches(j) ? st : 1.0);
      out.gamma(i, j) = state.gamma(i, j) * f;
      if (i == j && touches(i)) out.gamma(i, j) += 1.0 - transmission;
    }
  for (int i = 0; i < n2; ++i)
    if (touches(i)) out.d[static_cast<std::size_t>(i)] *= st;
  return out;
}

/// Remove the given modes (delete their gamma rows/columns and d entries).
inline GaussianState trace_out(const GaussianState& state, const std::vector<int>& modes) {
  std::set<int> drop(modes.begin(), modes.end());
  for (int m : drop)
    if (m < 0 || m >= state.modes) throw domain_error("invalid mode in trace_out");
  const int kept = state.modes - static_cast<int>(drop.size());
  if (kept < 1) throw domain_error("trace_out would remove all modes");
  std::vector<int> keep;
  for (int m = 0; m < state.modes; ++m)
    if (!drop.count(m)) keep.push_back(m);

  GaussianState out;
  out.modes = kept;
  out.copies = state.copies;
  out.gamma = Matrix<double>(2 * kept, 2 * kept, 0.0);
  out.d.assign(static_cast<std::size_t>(2 * kept), 0.0);
  auto old_q = [&](int new_q) {
    return new_q < kept ? keep[static_cast<std::size_t>(new_q)]
                        : keep[static_cast<std::size_t>(new_q - kept)] + state.modes;
  };
  for (int i = 0; i < 2 * kept; ++i) {
    out.d[static_cast<std::size_t>(i)] = state.d[static_cast<std::size_t>(old_q(i))];
    for (int j = 0; j < 2 * kept; ++j) out.gamma(i, j) = state.gamma(old_q(i), old_q(j));
  }
  return out;
}

/// Mean photon number of one mode: (gamma_xx + gamma_pp + d_x^2 + d_p^2 - 2)/4,
/// counted per copy block.
inline double mean_photons(const GaussianState& s, int mode) {
  if (mode < 0 || mode >= s.modes) throw domain_error("invalid mode index");
  const double dx = s.d[static_cast<std::size_t>(mode)];
  const double dp = s.d[static_cast<std::size_t>(mode + s.modes)];
  return 0.25 * (s.gamma(mode, mode) + s.gamma(mode + s.modes, mode + s.modes) +
                 2.0 * (dx * dx + dp * dp) - 2.0);
}

}  // namespace gphot
