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
#include <set>
#include <vector>

#include "gphot/common.hpp"
#include "gphot/statistics.hpp"

namespace gphot {

enum class PhotonOp { added, subtracted };

/// Photon-added (a^dag^k rho a^k / m^(k)) or photon-subtracted
/// (a^k rho a^dag^k / m_(k)) Gaussian state, with k photons per mode and the
/// normalization moment cached at construction.
struct ModifiedState {
  GaussianState base;
  PhotonOp kind = PhotonOp::subtracted;
  std::vector<int> k;  // one entry per base mode
  double norm = 1.0;
};

/// Compute the normalization moment m_(k) (subtracted) or m^(k) (added) as
/// the corresponding factorial moment of the base state at unit efficiency
/// and zero noise, and build the modified state.
inline ModifiedState normalize(const GaussianState& base, PhotonOp kind, std::vector<int> k) {
  if (static_cast<int>(k.size()) != base.modes)
    throw domain_error("one added/subtracted photon count per mode required");
  for (int ki : k)
    if (ki < 0) throw domain_error("added/subtracted photon counts must be >= 0");

  ModifiedState m{base, kind, std::move(k), 1.0};
  DetectorPartition part;
  std::vector<int> orders;
  for (int i = 0; i < base.modes; ++i) {
    if (m.k[static_cast<std::size_t>(i)] > 0) {
      part.detectors.push_back({{i}, {1.0}, 0.0});
      orders.push_back(m.k[static_cast<std::size_t>(i)]);
    }
  }
  if (!orders.empty()) {
    m.norm = (kind == PhotonOp::subtracted) ? falling_factorial(base, part, orders)
                                            : rising_factorial(base, part, orders);
    if (!(m.norm > 0.0))
      throw physicality_error("modified state has non-positive normalization moment");
  }
  return m;
}

namespace detail {

struct ModifiedG {
  Series series;   // evaluated in the aux-augmented context
  MultiIndex aux;  // aux exponents of the slice carrying the result
  double factor;   // sign * aux factorials / norm
};

/// Evaluate tr(rho_mod g(w)) over an aux-augmented context. The y-dependent
/// arguments `w` must already live in `ctx`; aux variables for the modified
/// modes occupy indices [aux_offset, aux_offset + #modified).
///
/// subtracted: tr(rho_-k g(w)) = (-1)^k / m_(k) * d^k/dw^k G(w), realized by
/// w -> w + t and reading the t^k coefficient.
/// added: tr(rho_+k g(w)) = 1/m^(k) * d^k/dr^k [ G(w~) prod 1/(1 - r(1-w)) ]
/// at r = 0 with w~ = 1 - (1-w)/(1 - r(1-w)).
inline ModifiedG modified_G(const ModifiedState& m, const std::vector<Series>& w,
                            const Context& ctx, int aux_offset) {
  const int s = m.base.modes;
  GArgs args;
  args.w = w;
  Series prefactor(ctx, 1.0);
  MultiIndex aux;
  double factor = 1.0 / m.norm;

  int idx = 0;
  for (int mode = 0; mode < s; ++mode) {
    const int ki = m.k[static_cast<std::size_t>(mode)];
    if (ki == 0) continue;
    const Series t = variable(ctx, aux_offset + idx);
    if (m.kind == PhotonOp::subtracted) {
      args.w[static_cast<std::size_t>(mode)] = args.w[static_cast<std::size_t>(mode)] + t;
      if (ki % 2 != 0) factor = -factor;
    } else {
      const Series one_minus_w = -args.w[static_cast<std::size_t>(mode)] + cdouble(1.0);
      const Series q = reciprocal(-(t * one_minus_w) + cdouble(1.0));
      args.w[static_cast<std::size_t>(mode)] = -(one_minus_w * q) + cdouble(1.0);
      prefactor = prefactor * q;
    }
    aux.push_back(ki);
    factor *= factorial(ki);
    ++idx;
  }
  return {prefactor * eval_G(m.base, args), std::move(aux), factor};
}

/// Shared pipeline: reduce the state (keeping detector and modified modes),
/// build the aux-augmented context, run the requested statistics family.
inline double modified_statistic(const ModifiedState& m, const DetectorPartition& part,
                                 Family family, const std::vector<int>& orders,
                                 const std::vector<double>& centers) {
  validate(part, m.base.modes);
  if (orders.size() != part.detectors.size())
    throw domain_error("one order per detector required");

  // keep = detector modes + modified modes (trace-out must not cross the
  // photon addition/subtraction; an unobserved modified mode enters the
  // evaluation with w = 0, which marginalizes it exactly).
  std::set<int> keep;
  for (const auto& det : part.detectors) keep.insert(det.modes.begin(), det.modes.end());
  for (int i = 0; i < m.base.modes; ++i)
    if (m.k[static_cast<std::size_t>(i)] > 0) keep.insert(i);

  std::vector<int> drop;
  for (int i = 0; i < m.base.modes; ++i)
    if (!keep.count(i)) drop.push_back(i);

  ModifiedState red = m;
  if (!drop.empty()) {
    red.base = trace_out(m.base, drop);
    red.k.clear();
    for (int i = 0; i < m.base.modes; ++i)
      if (keep.count(i)) red.k.push_back(m.k[static_cast<std::size_t>(i)]);
  }
  std::vector<int> new_index(static_cast<std::size_t>(m.base.modes), -1);
  int next = 0;
  for (int i = 0; i < m.base.modes; ++i)
    if (keep.count(i)) new_index[static_cast<std::size_t>(i)] = next++;
  std::vector<Detector> dets = part.detectors;
  for (auto& det : dets)
    for (auto& mo : det.modes) mo = new_index[static_cast<std::size_t>(mo)];

  const int d_count = static_cast<int>(dets.size());
  std::vector<int> ctx_orders(orders.begin(), orders.end());
  for (int ki : red.k)
    if (ki > 0) ctx_orders.push_back(ki);
  Context ctx = make_context(ctx_orders);

  // family substitution w_s(y) for detector modes; w = 0 marginalizes the rest
  std::vector<Series> w(static_cast<std::size_t>(red.base.modes), Series(ctx));
  Series prefactor(ctx, 1.0);
  for (int d = 0; d < d_count; ++d) {
    const Series y = variable(ctx, d);
    Series base;
    switch (family) {
      case Family::pnd:
      case Family::cumulative: base = -y + cdouble(1.0); break;
      case Family::moments: base = -exp(y) + cdouble(1.0); break;
      case Family::falling: base = -y; break;
      case Family::rising: base = -y * reciprocal(-y + cdouble(1.0)); break;
    }
    for (std::size_t i = 0; i < dets[static_cast<std::size_t>(d)].modes.size(); ++i)
      w[static_cast<std::size_t>(dets[static_cast<std::size_t>(d)].modes[i])] =
          base * cdouble(dets[static_cast<std::size_t>(d)].eta[i]);

    const double nu = dets[static_cast<std::size_t>(d)].nu;
    switch (family) {
      case Family::pnd:
        if (nu != 0.0) prefactor = prefactor * exp((y - cdouble(1.0)) * cdouble(nu));
        break;
      case Family::cumulative:
        prefactor = prefactor * reciprocal(-y + cdouble(1.0));
        if (nu != 0.0) prefactor = prefactor * exp((y - cdouble(1.0)) * cdouble(nu));
        break;
      case Family::moments:
        prefactor = prefactor *
                    exp((exp(y) - cdouble(1.0)) * cdouble(nu) -
                        y * cdouble(centers[static_cast<std::size_t>(d)]));
        break;
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

  auto mg = modified_G(red, w, ctx, d_count);
  Series full = prefactor * mg.series;

  MultiIndex k(orders.begin(), orders.end());
  k.insert(k.end(), mg.aux.begin(), mg.aux.end());
  cdouble coeff = full.coefficient(k);

  double y_factor = 1.0;  // derivative (not coefficient) convention in y
  if (family != Family::pnd && family != Family::cumulative)
    for (int o : orders) y_factor *= factorial(o);
  return real_checked(coeff * mg.factor * y_factor);
}

}  // namespace detail

/// tr(rho_mod g(w)): generating function of the modified state over the given
/// w arguments; `ctx` must reserve one aux variable per modified mode
/// starting at `aux_offset`, each with box order >= k of its mode. Exposed
/// for cross-checks; the statistics functions below are the main interface.
inline Series modified_G(const ModifiedState& m, const std::vector<Series>& w,
                         const Context& ctx, int aux_offset) {
  auto mg = detail::modified_G(m, w, ctx, aux_offset);
  // contract the aux slice back into a plain series over the remaining vars
  Series out(ctx);
  const int aux_count = static_cast<int>(mg.aux.size());
  mg.series.for_each([&](const MultiIndex& e, cdouble c) {
    for (int i = 0; i < aux_count; ++i)
      if (e[static_cast<std::size_t>(aux_offset + i)] !=
          mg.aux[static_cast<std::size_t>(i)])
        return;
    MultiIndex reduced = e;
    for (int i = 0; i < aux_count; ++i) reduced[static_cast<std::size_t>(aux_offset + i)] = 0;
    out.add_to(reduced, c * mg.factor);
  });
  return out;
}

inline double modified_pnd(const ModifiedState& m, const DetectorPartition& part,
                           const std::vector<int>& counts) {
  return clamp_probability(
      detail::modified_statistic(m, part, detail::Family::pnd, counts, {}));
}

inline double modified_cumulative(const ModifiedState& m, const DetectorPartition& part,
                                  const std::vector<int>& counts) {
  return clamp_probability(
      detail::modified_statistic(m, part, detail::Family::cumulative, counts, {}));
}

inline double modified_moments(const ModifiedState& m, const DetectorPartition& part,
                               const std::vector<int>& orders,
                               const std::vector<double>& centers) {
  if (centers.size() != part.detectors.size())
    throw domain_error("one centering value per detector required");
  return detail::modified_statistic(m, part, detail::Family::moments, orders, centers);
}

inline double modified_falling_factorial(const ModifiedState& m, const DetectorPartition& part,
                                         const std::vector<int>& orders) {
  return detail::modified_statistic(m, part, detail::Family::falling, orders, {});
}

inline double modified_rising_factorial(const ModifiedState& m, const DetectorPartition& part,
                                        const std::vector<int>& orders) {
  return detail::modified_statistic(m, part, detail::Family::rising, orders, {});
}

/// Matrix elements of the modified state from the base state's elements:
///   <n| rho_-k |l> = <n+k| rho |l+k> / m_(k) * sqrt((l+k)! (n+k)! / (l! n!))
///   <n| rho_+k |l> = <n-k| rho |l-k> / m^(k) * sqrt(l! n! / ((l-k)! (n-k)!))
/// Added-state elements with n or l below k vanish identically.
inline cdouble modified_matrix_element(const ModifiedState& m, const std::vector<int>& n,
                                       const std::vector<int>& l) {
  const int s = m.base.modes;
  if (static_cast<int>(n.size()) != s || static_cast<int>(l.size()) != s)
    throw domain_error("one photon number per mode required");
  std::vector<int> ns(n), ls(l);
  double factor = 1.0 / m.norm;
  for (int i = 0; i < s; ++i) {
    const int ki = m.k[static_cast<std::size_t>(i)];
    if (n[static_cast<std::size_t>(i)] < 0 || l[static_cast<std::size_t>(i)] < 0)
      throw domain_error("photon numbers must be >= 0");
    if (m.kind == PhotonOp::subtracted) {
      ns[static_cast<std::size_t>(i)] += ki;
      ls[static_cast<std::size_t>(i)] += ki;
      factor *= std::sqrt(factorial(ls[static_cast<std::size_t>(i)]) *
                          factorial(ns[static_cast<std::size_t>(i)]) /
                          (factorial(l[static_cast<std::size_t>(i)]) *
                           factorial(n[static_cast<std::size_t>(i)])));
    } else {
      if (n[static_cast<std::size_t>(i)] < ki || l[static_cast<std::size_t>(i)] < ki)
        return 0.0;
      ns[static_cast<std::size_t>(i)] -= ki;
      ls[static_cast<std::size_t>(i)] -= ki;
      factor *= std::sqrt(factorial(l[static_cast<std::size_t>(i)]) *
                          factorial(n[static_cast<std::size_t>(i)]) /
                          (factorial(ls[static_cast<std::size_t>(i)]) *
                           factorial(ns[static_cast<std::size_t>(i)])));
    }
  }
  return factor * fock_matrix_element(m.base, ns, ls);
}

}  // namespace gphot
