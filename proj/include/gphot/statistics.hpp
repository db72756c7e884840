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
#include <optional>
#include <set>
#include <vector>

#include "gphot/common.hpp"
#include "gphot/gaussian.hpp"
#include "gphot/matrix.hpp"
#include "gphot/series.hpp"

namespace gphot {

/// One detector: the state modes it collects, a detection efficiency per
/// collected mode, and a Poissonian noise parameter (mean noise counts per
/// acquisition window).
struct Detector {
  std::vector<int> modes;
  std::vector<double> eta;
  double nu = 0.0;
};

/// Assignment of state modes to detectors. Mode lists must be disjoint;
/// modes assigned to no detector are marginalized before evaluation.
struct DetectorPartition {
  std::vector<Detector> detectors;
};

inline void validate(const DetectorPartition& part, int state_modes) {
  std::set<int> seen;
  for (const auto& det : part.detectors) {
    if (det.modes.empty()) throw domain_error("detector with empty mode list");
    if (det.modes.size() != det.eta.size())
      throw domain_error("detector mode/efficiency length mismatch");
    if (det.nu < 0) throw domain_error("noise parameter must be >= 0");
    for (std::size_t i = 0; i < det.modes.size(); ++i) {
      int m = det.modes[i];
      if (m < 0 || m >= state_modes) throw domain_error("detector references invalid mode");
      if (!seen.insert(m).second) throw domain_error("mode assigned to two detectors");
      if (det.eta[i] < 0.0 || det.eta[i] > 1.0)
        throw domain_error("efficiency must be in [0, 1]");
    }
  }
}

/// Arguments of the generating function G(u, v, w): one series per kept
/// mode. Empty u/v vectors mean "identically zero", in which case the Z and
/// zeta terms vanish exactly and no division by w is performed.
struct GArgs {
  std::vector<Series> u;  // empty or one per mode
  std::vector<Series> v;
  std::vector<Series> w;  // always one per mode
};

/// G(u, v, w) = exp(-z^T Lambda^-1 W z / 2 + Z) / sqrt(det Lambda), raised
/// to the state's copy multiplicity, with W = diag(w) + diag(w),
/// Lambda = I + W (Gamma - I)/2, Z = sum_s u_s v_s / w_s and z = d + zeta.
/// The copy power is taken as exp(K * exponent) * det(Lambda)^(-K/2), which
/// equals the K-th power in the truncated ring.
inline Series eval_G(const GaussianState& state, const GArgs& args) {
  const int s = state.modes;
  if (static_cast<int>(args.w.size()) != s)
    throw domain_error("eval_G: w argument count must match state modes");
  const bool have_uv = !args.u.empty() || !args.v.empty();
  if (have_uv && (static_cast<int>(args.u.size()) != s || static_cast<int>(args.v.size()) != s))
    throw domain_error("eval_G: u/v argument count must match state modes");
  const Context& ctx = args.w.front().context();

  // Lambda = I + W (Gamma - I) / 2, Series-valued 2S x 2S.
  Matrix<Series> lambda(2 * s, 2 * s, Series(ctx));
  for (int a = 0; a < 2 * s; ++a) {
    const Series& wa = args.w[static_cast<std::size_t>(a % s)];
    for (int b = 0; b < 2 * s; ++b) {
      double g = state.gamma(a, b) - (a == b ? 1.0 : 0.0);
      Series entry = (g == 0.0) ? Series(ctx) : wa * cdouble(0.5 * g);
      if (a == b) entry = entry + cdouble(1.0);
      lambda(a, b) = entry;
    }
  }
  auto lu = lu_factor(lambda);
  Series det = Series(ctx, 1.0);
  for (int i = 0; i < 2 * s; ++i) det = det * lu.lu(i, i);
  if (lu.parity < 0) det = -det;

  // single-copy generating function first; the copy multiplicity is applied
  // as an exact integer power at the end (repeated squaring keeps the
  // coefficients at working precision, unlike exponentiating K-scaled
  // arguments)
  Series single = pow_real(det, -0.5);

  bool zero_d = true;
  for (double x : state.d) zero_d = zero_d && x == 0.0;

  if (have_uv || !zero_d) {
    // z = d + zeta with zeta_x = -(u + v)/(sqrt(2) w), zeta_p = i(v - u)/(sqrt(2) w)
    std::vector<Series> z(static_cast<std::size_t>(2 * s), Series(ctx));
    std::vector<std::optional<Series>> w_inv(static_cast<std::size_t>(s));
    Series big_z(ctx);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < s; ++m) {
      Series zx(ctx, state.d[static_cast<std::size_t>(m)]);
      Series zp(ctx, state.d[static_cast<std::size_t>(m + s)]);
      if (have_uv) {
        const Series& um = args.u[static_cast<std::size_t>(m)];
        const Series& vm = args.v[static_cast<std::size_t>(m)];
        if (!w_inv[static_cast<std::size_t>(m)])
          w_inv[static_cast<std::size_t>(m)] = reciprocal(args.w[static_cast<std::size_t>(m)]);
        const Series& wi = *w_inv[static_cast<std::size_t>(m)];
        zx = zx - (um + vm) * wi * cdouble(inv_sqrt2);
        zp = zp + (vm - um) * wi * cdouble(cdouble(0.0, 1.0) * inv_sqrt2);
        big_z = big_z + um * vm * wi;
      }
      z[static_cast<std::size_t>(m)] = zx;
      z[static_cast<std::size_t>(m + s)] = zp;
    }
    // quadratic form z^T Lambda^-1 W z via a linear solve (never an inverse)
    Matrix<Series> rhs(2 * s, 1, Series(ctx));
    for (int a = 0; a < 2 * s; ++a)
      rhs(a, 0) = args.w[static_cast<std::size_t>(a % s)] * z[static_cast<std::size_t>(a)];
    Matrix<Series> x = solve_with_lu(lu, rhs);
    Series quad(ctx);
    for (int a = 0; a < 2 * s; ++a) quad = quad + z[static_cast<std::size_t>(a)] * x(a, 0);
    single = single * exp(big_z - quad * cdouble(0.5));
  }
  return state.copies == 1 ? single : pow_int(single, state.copies);
}

namespace detail {

/// Reduced evaluation setup: unassigned modes traced out, detector mode
/// indices remapped into the reduced state.
struct Reduced {
  GaussianState state;
  std::vector<Detector> detectors;
};

inline Reduced marginalize(const GaussianState& state, const DetectorPartition& part) {
  validate(part, state.modes);
  std::set<int> used;
  for (const auto& det : part.detectors) used.insert(det.modes.begin(), det.modes.end());
  std::vector<int> drop;
  for (int m = 0; m < state.modes; ++m)
    if (!used.count(m)) drop.push_back(m);

  Reduced r;
  r.state = drop.empty() ? state : trace_out(state, drop);
  std::vector<int> new_index(static_cast<std::size_t>(state.modes), -1);
  int next = 0;
  for (int m = 0; m < state.modes; ++m)
    if (used.count(m)) new_index[static_cast<std::size_t>(m)] = next++;
  r.detectors = part.detectors;
  for (auto& det : r.detectors)
    for (auto& m : det.modes) m = new_index[static_cast<std::size_t>(m)];
  return r;
}

enum class Family { pnd, cumulative, moments, falling, rising };

/// Per-mode substitution w_s(y_d) and the family's noise/centering prefactor.
/// `centers` is only used by the moments family.
inline Series statistics_series(const GaussianState& state, const std::vector<Detector>& dets,
                                const Context& ctx, Family family,
                                const std::vector<double>& centers) {
  const int s = state.modes;
  GArgs args;
  args.w.assign(static_cast<std::size_t>(s), Series(ctx));
  Series prefactor(ctx, 1.0);

  for (std::size_t d = 0; d < dets.size(); ++d) {
    const Series y = variable(ctx, static_cast<int>(d));
    Series base;  // detector-level factor of w_s before the efficiency
    switch (family) {
      case Family::pnd:
      case Family::cumulative:
        base = -y + cdouble(1.0);  // w = eta (1 - y)
        break;
      case Family::moments:
        base = -exp(y) + cdouble(1.0);  // w = eta (1 - e^y)
        break;
      case Family::falling:
        base = -y;  // w = -eta y
        break;
      case Family::rising:
        base = -y * reciprocal(-y + cdouble(1.0));  // w = eta y/(y - 1)
        break;
    }
    for (std::size_t i = 0; i < dets[d].modes.size(); ++i)
      args.w[static_cast<std::size_t>(dets[d].modes[i])] = base * cdouble(dets[d].eta[i]);

    const double nu = dets[d].nu;
    switch (family) {
      case Family::pnd:
        if (nu != 0.0) prefactor = prefactor * exp((y - cdouble(1.0)) * cdouble(nu));
        break;
      case Family::cumulative:
        prefactor = prefactor * reciprocal(-y + cdouble(1.0));
        if (nu != 0.0) prefactor = prefactor * exp((y - cdouble(1.0)) * cdouble(nu));
        break;
      case Family::moments: {
        Series arg = (exp(y) - cdouble(1.0)) * cdouble(nu) - y * cdouble(centers[d]);
        prefactor = prefactor * exp(arg);
        break;
      }
      case Family::falling:
        if (nu != 0.0) prefactor = prefactor * exp(y * cdouble(nu));
        break;
      case Family::rising: {
        Series inv1my = reciprocal(-y + cdouble(1.0));
        prefactor = prefactor * inv1my;
        if (nu != 0.0) prefactor = prefactor * exp(y * inv1my * cdouble(nu));
        break;
      }
    }
  }
  return prefactor * eval_G(state, args);
}

inline MultiIndex to_index(const std::vector<int>& n) { return MultiIndex(n.begin(), n.end()); }

}  // namespace detail

/// p(n_1, ..., n_D): probability for n_d detected photons in detector d,
/// including per-mode efficiencies and per-detector Poissonian noise.
inline double pnd(const GaussianState& state, const DetectorPartition& part,
                  const std::vector<int>& counts) {
  if (counts.size() != part.detectors.size())
    throw domain_error("one photon count per detector required");
  for (int n : counts)
    if (n < 0) throw domain_error("photon counts must be >= 0");
  auto red = detail::marginalize(state, part);
  Context ctx = make_context(std::vector<int>(counts.begin(), counts.end()));
  Series g = detail::statistics_series(red.state, red.detectors, ctx, detail::Family::pnd, {});
  return clamp_probability(real_checked(g.coefficient(detail::to_index(counts))));
}

/// p(N_1 <= n_1, ..., N_D <= n_D).
inline double cumulative(const GaussianState& state, const DetectorPartition& part,
                         const std::vector<int>& counts) {
  if (counts.size() != part.detectors.size())
    throw domain_error("one photon count per detector required");
  for (int n : counts)
    if (n < 0) throw domain_error("photon counts must be >= 0");
  auto red = detail::marginalize(state, part);
  Context ctx = make_context(std::vector<int>(counts.begin(), counts.end()));
  Series g =
      detail::statistics_series(red.state, red.detectors, ctx, detail::Family::cumulative, {});
  return clamp_probability(real_checked(g.coefficient(detail::to_index(counts))));
}

/// <prod_d (N_d - mu_d)^{k_d}>; pass mu = 0 for raw moments or the detector
/// means for central moments.
inline double moments(const GaussianState& state, const DetectorPartition& part,
                      const std::vector<int>& orders, const std::vector<double>& centers) {
  if (orders.size() != part.detectors.size() || centers.size() != part.detectors.size())
    throw domain_error("one order and one centering value per detector required");
  for (int k : orders)
    if (k < 0) throw domain_error("moment orders must be >= 0");
  auto red = detail::marginalize(state, part);
  Context ctx = make_context(std::vector<int>(orders.begin(), orders.end()));
  Series g =
      detail::statistics_series(red.state, red.detectors, ctx, detail::Family::moments, centers);
  return real_checked(g.derivative(detail::to_index(orders)));
}

/// Falling factorial moments <prod_d N_d (N_d - 1) ... (N_d - k_d + 1)>.
inline double falling_factorial(const GaussianState& state, const DetectorPartition& part,
                                const std::vector<int>& orders) {
  if (orders.size() != part.detectors.size())
    throw domain_error("one order per detector required");
  for (int k : orders)
    if (k < 0) throw domain_error("factorial moment orders must be >= 0");
  auto red = detail::marginalize(state, part);
  Context ctx = make_context(std::vector<int>(orders.begin(), orders.end()));
  Series g = detail::statistics_series(red.state, red.detectors, ctx, detail::Family::falling, {});
  return real_checked(g.derivative(detail::to_index(orders)));
}

/// Rising factorial moments <prod_d (N_d + 1) ... (N_d + k_d)>.
inline double rising_factorial(const GaussianState& state, const DetectorPartition& part,
                               const std::vector<int>& orders) {
  if (orders.size() != part.detectors.size())
    throw domain_error("one order per detector required");
  for (int k : orders)
    if (k < 0) throw domain_error("factorial moment orders must be >= 0");
  auto red = detail::marginalize(state, part);
  Context ctx = make_context(std::vector<int>(orders.begin(), orders.end()));
  Series g = detail::statistics_series(red.state, red.detectors, ctx, detail::Family::rising, {});
  return real_checked(g.derivative(detail::to_index(orders)));
}

/// <alpha| rho |beta> = exp(-(|alpha|^2 + |beta|^2)/2) G(alpha^*, beta, 1).
inline cdouble coherent_matrix_element(const GaussianState& state,
                                       const std::vector<cdouble>& alpha,
                                       const std::vector<cdouble>& beta) {
  const int s = state.modes;
  if (static_cast<int>(alpha.size()) != s || static_cast<int>(beta.size()) != s)
    throw domain_error("one coherent amplitude per mode required");
  Context ctx = make_context({});  // scalar evaluation
  GArgs args;
  double norm = 0.0;
  for (int m = 0; m < s; ++m) {
    args.u.push_back(Series(ctx, std::conj(alpha[static_cast<std::size_t>(m)])));
    args.v.push_back(Series(ctx, beta[static_cast<std::size_t>(m)]));
    args.w.push_back(Series(ctx, 1.0));
    norm += std::norm(alpha[static_cast<std::size_t>(m)]) +
            std::norm(beta[static_cast<std::size_t>(m)]);
  }
  return std::exp(-0.5 * norm) * eval_G(state, args).constant_term();
}

/// <n| rho |m> via the reduced-derivative form: with l = min(n, m),
/// dn = n - l, dm = m - l,
///   (-1)^l / sqrt(n! m!) d^l/dw^l d^dn/du^dn d^dm/dv^dm G |_{u=v=0, w=1}.
/// Only max(n_s, m_s) derivatives per mode are required.
inline cdouble fock_matrix_element(const GaussianState& state, const std::vector<int>& n,
                                   const std::vector<int>& m) {
  const int s = state.modes;
  if (static_cast<int>(n.size()) != s || static_cast<int>(m.size()) != s)
    throw domain_error("one photon number per mode required");
  std::vector<int> l(n.size()), dn(n.size()), dm(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0 || m[i] < 0) throw domain_error("photon numbers must be >= 0");
    l[i] = std::min(n[i], m[i]);
    dn[i] = n[i] - l[i];
    dm[i] = m[i] - l[i];
  }
  // variables: per mode s -> (w_s at 3s, u_s at 3s+1, v_s at 3s+2)
  std::vector<int> orders;
  for (int i = 0; i < s; ++i) {
    orders.push_back(l[static_cast<std::size_t>(i)]);
    orders.push_back(dn[static_cast<std::size_t>(i)]);
    orders.push_back(dm[static_cast<std::size_t>(i)]);
  }
  Context ctx = make_context(orders);
  GArgs args;
  for (int i = 0; i < s; ++i) {
    args.w.push_back(variable(ctx, 3 * i, 1.0));
    args.u.push_back(variable(ctx, 3 * i + 1, 0.0));
    args.v.push_back(variable(ctx, 3 * i + 2, 0.0));
  }
  Series g = eval_G(state, args);
  MultiIndex k;
  double sign = 1.0, norm = 1.0;
  for (int i = 0; i < s; ++i) {
    k.push_back(l[static_cast<std::size_t>(i)]);
    k.push_back(dn[static_cast<std::size_t>(i)]);
    k.push_back(dm[static_cast<std::size_t>(i)]);
    if (l[static_cast<std::size_t>(i)] % 2 != 0) sign = -sign;
    norm *= factorial(n[static_cast<std::size_t>(i)]) * factorial(m[static_cast<std::size_t>(i)]);
  }
  return sign / std::sqrt(norm) * g.derivative(k);
}

}  // namespace gphot
