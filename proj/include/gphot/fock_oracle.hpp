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

// Brute-force truncated number-basis reference implementation. It exists to
// cross-check the generating-function engine in tests and the CLI selftest
// and is deliberately simple: dense amplitudes, explicit truncation-mass
// accounting, no performance concerns. The main evaluation pipeline never
// calls into this header.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "gphot/common.hpp"

namespace gphot::oracle {

/// Pure state on a small number of modes: dense complex amplitudes over the
/// truncated number-basis grid [0..cutoff_m] per mode.
struct FockState {
  std::vector<int> cutoff;
  std::vector<cdouble> amp;  // row-major, last mode fastest
};

/// Weighted ensemble of pure states (weights need not sum to 1: the missing
/// mass is the truncation defect).
struct FockMixture {
  std::vector<std::pair<double, FockState>> components;
  double mass_defect = 0.0;
};

/// Joint photon-number distribution over detectors, with the probability
/// mass known to lie outside the table tracked explicitly. Comparisons
/// should allow tolerance + mass_defect.
struct PndTable {
  std::vector<int> dims;  // table covers 0..dims[d]-1 per detector
  std::vector<double> p;
  double mass_defect = 0.0;
};

namespace detail {

inline std::size_t grid_size(const std::vector<int>& cutoff) {
  std::size_t n = 1;
  for (int c : cutoff) n *= static_cast<std::size_t>(c) + 1;
  return n;
}

inline std::vector<std::size_t> strides_for(const std::vector<int>& cutoff) {
  std::vector<std::size_t> s(cutoff.size(), 1);
  for (int i = static_cast<int>(cutoff.size()) - 2; i >= 0; --i)
    s[static_cast<std::size_t>(i)] =
        s[static_cast<std::size_t>(i + 1)] * (static_cast<std::size_t>(cutoff[static_cast<std::size_t>(i + 1)]) + 1);
  return s;
}

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b *= static_cast<double>(n - k + i) / i;
  return b;
}

}  // namespace detail

inline FockState pure_vacuum(int modes, int cutoff) {
  FockState s;
  s.cutoff.assign(static_cast<std::size_t>(modes), cutoff);
  s.amp.assign(detail::grid_size(s.cutoff), 0.0);
  s.amp[0] = 1.0;
  return s;
}

inline double norm_squared(const FockState& s) {
  double n = 0.0;
  for (cdouble a : s.amp) n += std::norm(a);
  return n;
}

// ---------------------------------------------------------------------------
// state constructors

/// coherent |alpha>: amplitudes e^{-|a|^2/2} a^n / sqrt(n!).
inline FockMixture oracle_coherent(cdouble alpha, int cutoff, double max_defect = 1e-10) {
  FockState s;
  s.cutoff = {cutoff};
  s.amp.resize(static_cast<std::size_t>(cutoff) + 1);
  cdouble term = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n <= cutoff; ++n) {
    s.amp[static_cast<std::size_t>(n)] = term;
    term *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  double defect = 1.0 - norm_squared(s);
  if (defect > max_defect) throw domain_error("coherent oracle cutoff too small");
  return {{{1.0, std::move(s)}}, std::max(defect, 0.0)};
}

/// thermal state: diagonal mixture p_n = mu^n / (1+mu)^{n+1}.
inline FockMixture oracle_thermal(double mu, int cutoff, double max_defect = 1e-10) {
  if (mu < 0) throw domain_error("thermal mean photon number must be >= 0");
  FockMixture m;
  double total = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    double p = std::pow(mu / (1.0 + mu), n) / (1.0 + mu);
    FockState comp;
    comp.cutoff = {cutoff};
    comp.amp.assign(static_cast<std::size_t>(cutoff) + 1, 0.0);
    comp.amp[static_cast<std::size_t>(n)] = 1.0;
    m.components.emplace_back(p, std::move(comp));
    total += p;
  }
  m.mass_defect = std::max(1.0 - total, 0.0);
  if (m.mass_defect > max_defect) throw domain_error("thermal oracle cutoff too small");
  return m;
}

/// two-mode squeezed vacuum: sech r * (e^{i theta} tanh r)^n |n, n>.
inline FockMixture oracle_tmsv(double r, double theta, int cutoff, double max_defect = 1e-10) {
  if (r < 0) throw domain_error("squeezing magnitude must be >= 0");
  FockState s;
  s.cutoff = {cutoff, cutoff};
  s.amp.assign(detail::grid_size(s.cutoff), 0.0);
  const cdouble q = std::tanh(r) * std::exp(cdouble(0.0, theta));
  cdouble a = 1.0 / std::cosh(r);
  for (int n = 0; n <= cutoff; ++n) {
    s.amp[static_cast<std::size_t>(n) * (static_cast<std::size_t>(cutoff) + 1) +
          static_cast<std::size_t>(n)] = a;
    a *= q;
  }
  double defect = 1.0 - norm_squared(s);
  if (defect > max_defect) throw domain_error("tmsv oracle cutoff too small");
  return {{{1.0, std::move(s)}}, std::max(defect, 0.0)};
}

/// single-mode squeezed vacuum S(r e^{i theta}) |0>:
/// amplitudes (e^{i theta} tanh r)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r) on |2n>.
inline FockMixture oracle_squeezed(double r, double theta, int cutoff,
                                   double max_defect = 1e-10) {
  if (r < 0) throw domain_error("squeezing magnitude must be >= 0");
  FockState s;
  s.cutoff = {cutoff};
  s.amp.assign(static_cast<std::size_t>(cutoff) + 1, 0.0);
  const cdouble q = std::tanh(r) * std::exp(cdouble(0.0, theta));
  cdouble c = 1.0 / std::sqrt(std::cosh(r));
  for (int n = 0; 2 * n <= cutoff; ++n) {
    s.amp[static_cast<std::size_t>(2 * n)] = c;
    // c_{n+1}/c_n = q * sqrt((2n+1)(2n+2)) / (2(n+1))
    c *= q * std::sqrt(static_cast<double>(2 * n + 1) * (2 * n + 2)) / (2.0 * (n + 1));
  }
  double defect = 1.0 - norm_squared(s);
  if (defect > max_defect) throw domain_error("squeezed oracle cutoff too small");
  return {{{1.0, std::move(s)}}, std::max(defect, 0.0)};
}

// ---------------------------------------------------------------------------
// channels

/// Tensor product of two mixtures.
inline FockMixture oracle_tensor(const FockMixture& a, const FockMixture& b) {
  FockMixture out;
  out.mass_defect = a.mass_defect + b.mass_defect;
  for (const auto& [wa, sa] : a.components)
    for (const auto& [wb, sb] : b.components) {
      FockState s;
      s.cutoff = sa.cutoff;
      s.cutoff.insert(s.cutoff.end(), sb.cutoff.begin(), sb.cutoff.end());
      s.amp.resize(detail::grid_size(s.cutoff));
      for (std::size_t i = 0; i < sa.amp.size(); ++i)
        for (std::size_t j = 0; j < sb.amp.size(); ++j)
          s.amp[i * sb.amp.size() + j] = sa.amp[i] * sb.amp[j];
      out.components.emplace_back(wa * wb, std::move(s));
    }
  return out;
}

/// Exact beam splitter unitary on modes (i, j) matching the engine's
/// convention: a_i' = t a_i - r a_j, a_j' = r a_i + t a_j acting on creation
/// operators, t = sqrt(T), r = sqrt(1-T). Output cutoffs grow to hold every
/// redistributed photon, so the channel is exact.
inline FockState oracle_beamsplitter(const FockState& in, int i, int j, double transmission) {
  const int modes = static_cast<int>(in.cutoff.size());
  if (i < 0 || j < 0 || i >= modes || j >= modes || i == j)
    throw domain_error("invalid beam splitter oracle modes");
  if (transmission < 0.0 || transmission > 1.0)
    throw domain_error("beam splitter transmission must be in [0, 1]");
  const double t = std::sqrt(transmission), rr = std::sqrt(1.0 - transmission);

  FockState out;
  out.cutoff = in.cutoff;
  const int total = in.cutoff[static_cast<std::size_t>(i)] + in.cutoff[static_cast<std::size_t>(j)];
  out.cutoff[static_cast<std::size_t>(i)] = total;
  out.cutoff[static_cast<std::size_t>(j)] = total;
  if (detail::grid_size(out.cutoff) > (1u << 22))
    throw domain_error("beam splitter oracle cutoff overflow");
  out.amp.assign(detail::grid_size(out.cutoff), 0.0);

  auto out_strides = detail::strides_for(out.cutoff);
  std::vector<int> idx(static_cast<std::size_t>(modes), 0);
  for (std::size_t flat = 0; flat < in.amp.size(); ++flat) {
    cdouble a = in.amp[flat];
    if (a != cdouble(0.0)) {
      const int ni = idx[static_cast<std::size_t>(i)], nj = idx[static_cast<std::size_t>(j)];
      // (t ai+ - r aj+)^ni (r ai+ + t aj+)^nj |0,0> expanded binomially
      for (int k = 0; k <= ni; ++k) {
        for (int l = 0; l <= nj; ++l) {
          const int out_i = k + l, out_j = ni + nj - k - l;
          double coeff = detail::binomial(ni, k) * detail::binomial(nj, l) *
                         std::pow(t, k) * std::pow(-rr, ni - k) * std::pow(rr, l) *
                         std::pow(t, nj - l);
          // creation-operator normalization: sqrt(out_i! out_j! / (ni! nj!))
          coeff *= std::sqrt(factorial(out_i) * factorial(out_j) /
                             (factorial(ni) * factorial(nj)));
          // rebase flat index onto the enlarged grid
          std::size_t rebased = 0;
          for (int m = 0; m < modes; ++m) {
            int nm = (m == i) ? out_i : (m == j) ? out_j : idx[static_cast<std::size_t>(m)];
            rebased += static_cast<std::size_t>(nm) * out_strides[static_cast<std::size_t>(m)];
          }
          out.amp[rebased] += a * coeff;
        }
      }
    }
    // odometer
    for (int m = modes - 1; m >= 0; --m) {
      if (++idx[static_cast<std::size_t>(m)] <= in.cutoff[static_cast<std::size_t>(m)]) break;
      idx[static_cast<std::size_t>(m)] = 0;
    }
  }
  return out;
}

inline FockMixture oracle_beamsplitter(const FockMixture& in, int i, int j, double transmission) {
  FockMixture out;
  out.mass_defect = in.mass_defect;
  for (const auto& [w, s] : in.components)
    out.components.emplace_back(w, oracle_beamsplitter(s, i, j, transmission));
  return out;
}

/// Trace out one mode: a pure component splits into one unnormalized pure
/// component per occupation of the traced mode.
inline FockMixture oracle_trace_out(const FockMixture& in, int mode) {
  FockMixture out;
  out.mass_defect = in.mass_defect;
  for (const auto& [w, s] : in.components) {
    const int modes = static_cast<int>(s.cutoff.size());
    if (mode < 0 || mode >= modes) throw domain_error("invalid trace-out mode");
    std::vector<int> rest_cutoff;
    for (int m = 0; m < modes; ++m)
      if (m != mode) rest_cutoff.push_back(s.cutoff[static_cast<std::size_t>(m)]);
    if (rest_cutoff.empty()) throw domain_error("cannot trace out all oracle modes");

    for (int n = 0; n <= s.cutoff[static_cast<std::size_t>(mode)]; ++n) {
      FockState comp;
      comp.cutoff = rest_cutoff;
      comp.amp.assign(detail::grid_size(rest_cutoff), 0.0);
      auto strides = detail::strides_for(s.cutoff);
      auto rest_strides = detail::strides_for(rest_cutoff);
      std::vector<int> idx(static_cast<std::size_t>(modes), 0);
      idx[static_cast<std::size_t>(mode)] = n;
      // walk the slice with the traced mode fixed at n
      std::size_t slice = detail::grid_size(rest_cutoff);
      for (std::size_t f = 0; f < slice; ++f) {
        std::size_t rem = f, src = static_cast<std::size_t>(n) * strides[static_cast<std::size_t>(mode)];
        int rm = 0;
        for (int m = 0; m < modes; ++m) {
          if (m == mode) continue;
          std::size_t v = rem / rest_strides[static_cast<std::size_t>(rm)];
          rem %= rest_strides[static_cast<std::size_t>(rm)];
          src += v * strides[static_cast<std::size_t>(m)];
          ++rm;
        }
        comp.amp[f] = s.amp[src];
      }
      double wn = norm_squared(comp);
      if (wn > 0.0) {
        double inv = 1.0 / std::sqrt(wn);
        for (auto& a : comp.amp) a *= inv;
        out.components.emplace_back(w * wn, std::move(comp));
      }
    }
  }
  return out;
}

/// Loss as the exact ancilla construction: couple the mode to a vacuum
/// ancilla with a beam splitter of the given transmission, trace the
/// ancilla out.
inline FockMixture oracle_loss(const FockMixture& in, int mode, double transmission) {
  FockMixture out;
  out.mass_defect = in.mass_defect;
  for (const auto& [w, s] : in.components) {
    FockState with_anc;
    with_anc.cutoff = s.cutoff;
    with_anc.cutoff.push_back(s.cutoff[static_cast<std::size_t>(mode)]);
    with_anc.amp.assign(detail::grid_size(with_anc.cutoff), 0.0);
    std::size_t anc_dim = static_cast<std::size_t>(with_anc.cutoff.back()) + 1;
    for (std::size_t f = 0; f < s.amp.size(); ++f) with_anc.amp[f * anc_dim] = s.amp[f];
    FockState mixed = oracle_beamsplitter(with_anc, mode, static_cast<int>(s.cutoff.size()),
                                          transmission);
    FockMixture tmp{{{w, std::move(mixed)}}, 0.0};
    FockMixture traced = oracle_trace_out(tmp, static_cast<int>(s.cutoff.size()));
    for (auto& c : traced.components) out.components.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// photon number distributions

/// Poisson convolution along one detector axis of a PND table; mass pushed
/// beyond the table boundary is added to the defect.
inline PndTable poisson_convolve(const PndTable& in, int axis, double nu) {
  if (nu < 0) throw domain_error("noise parameter must be >= 0");
  if (nu == 0.0) return in;
  PndTable out = in;
  std::fill(out.p.begin(), out.p.end(), 0.0);
  auto strides = detail::strides_for([&] {
    std::vector<int> c(in.dims.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = in.dims[i] - 1;
    return c;
  }());
  const int dim = in.dims[static_cast<std::size_t>(axis)];
  // precompute Poisson pmf up to the axis length, tail mass to defect
  std::vector<double> pois(static_cast<std::size_t>(dim));
  double term = std::exp(-nu), cdf = 0.0;
  for (int k = 0; k < dim; ++k) {
    pois[static_cast<std::size_t>(k)] = term;
    cdf += term;
    term *= nu / (k + 1);
  }
  for (std::size_t f = 0; f < in.p.size(); ++f) {
    double p = in.p[f];
    if (p == 0.0) continue;
    int n = static_cast<int>(f / strides[static_cast<std::size_t>(axis)]) % dim;
    double placed = 0.0;
    for (int k = 0; n + k < dim; ++k) {
      out.p[f + static_cast<std::size_t>(k) * strides[static_cast<std::size_t>(axis)]] +=
          p * pois[static_cast<std::size_t>(k)];
      placed += pois[static_cast<std::size_t>(k)];
    }
    out.mass_defect += p * std::max(1.0 - placed, 0.0);
  }
  return out;
}

/// 2D (or nD) convolution of two tables over the same detector layout.
inline PndTable convolve(const PndTable& a, const PndTable& b) {
  if (a.dims.size() != b.dims.size()) throw domain_error("convolve dimension mismatch");
  PndTable out;
  out.dims = a.dims;  // keep a's table size; excess mass goes to the defect
  out.p.assign(a.p.size(), 0.0);
  out.mass_defect = a.mass_defect + b.mass_defect;
  std::vector<int> ca(a.dims.size()), cb(b.dims.size());
  for (std::size_t i = 0; i < a.dims.size(); ++i) ca[i] = a.dims[i] - 1;
  for (std::size_t i = 0; i < b.dims.size(); ++i) cb[i] = b.dims[i] - 1;
  auto sa = detail::strides_for(ca), sb = detail::strides_for(cb);
  std::vector<int> ia(a.dims.size(), 0);
  for (std::size_t fa = 0; fa < a.p.size(); ++fa) {
    if (a.p[fa] != 0.0) {
      std::vector<int> ib(b.dims.size(), 0);
      for (std::size_t fb = 0; fb < b.p.size(); ++fb) {
        if (b.p[fb] != 0.0) {
          bool inside = true;
          std::size_t fo = 0;
          for (std::size_t d = 0; d < a.dims.size(); ++d) {
            int n = ia[d] + ib[d];
            if (n >= a.dims[d]) { inside = false; break; }
            fo += static_cast<std::size_t>(n) * sa[d];
          }
          if (inside)
            out.p[fo] += a.p[fa] * b.p[fb];
          else
            out.mass_defect += a.p[fa] * b.p[fb];
        }
        for (int d = static_cast<int>(b.dims.size()) - 1; d >= 0; --d) {
          if (++ib[static_cast<std::size_t>(d)] < b.dims[static_cast<std::size_t>(d)]) break;
          ib[static_cast<std::size_t>(d)] = 0;
        }
      }
    }
    for (int d = static_cast<int>(a.dims.size()) - 1; d >= 0; --d) {
      if (++ia[static_cast<std::size_t>(d)] < a.dims[static_cast<std::size_t>(d)]) break;
      ia[static_cast<std::size_t>(d)] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// closed-form references (used where the Fock grids would get too large)

/// PND of the displaced squeezed state D(alpha) S(r e^{i theta}) |0>,
///   p(n) = exp(-|a|^2 + Re(a^2 e^{-i th}) tanh r) tanh^n r / (n! 2^n cosh r)
///          * |H_n((a e^{-i th/2} sinh r - a* e^{i th/2} cosh r)/(i sqrt(sinh 2r)))|^2
/// with the physicists' Hermite polynomials evaluated by recurrence.
inline double analytic_displaced_squeezed_pnd(cdouble alpha, double r, double theta, int n) {
  if (r <= 0.0) throw domain_error("analytic form needs r > 0");
  const cdouble arg = (alpha * std::exp(cdouble(0.0, -theta / 2.0)) * std::sinh(r) -
                       std::conj(alpha) * std::exp(cdouble(0.0, theta / 2.0)) * std::cosh(r)) /
                      (cdouble(0.0, 1.0) * std::sqrt(std::sinh(2.0 * r)));
  cdouble h_prev = 1.0, h = 2.0 * arg;  // H_0, H_1
  if (n == 0) h = h_prev;
  for (int k = 1; k < n; ++k) {
    cdouble next = 2.0 * arg * h - 2.0 * static_cast<double>(k) * h_prev;
    h_prev = h;
    h = next;
  }
  const double t = std::tanh(r);
  const double prefactor =
      std::exp(-std::norm(alpha) +
               (alpha * alpha * std::exp(cdouble(0.0, -theta))).real() * t) *
      std::pow(t, n) / (factorial(n) * std::pow(2.0, n) * std::cosh(r));
  return prefactor * std::norm(h);
}

/// Closed-form generating function G(w) = G(0, 0, w) of the single-mode
/// displaced squeezed thermal state,
///   G(w) = exp(w E / (2 D)) / sqrt(D),
///   E = |a|^2 [w - 2 - w(1+2mu) cosh 2r] + w (1+2mu) Re(a^2 e^{-i th}) sinh 2r,
///   D = 1 - w + w^2 (1/2 + mu + mu^2) - (1+2mu)(w^2/2 - w) cosh 2r.
inline cdouble analytic_dst_generating(cdouble w, cdouble alpha, double r, double theta,
                                       double mu_thermal) {
  const double ch = std::cosh(2.0 * r), sh = std::sinh(2.0 * r);
  const double n1 = 1.0 + 2.0 * mu_thermal;
  const cdouble e = std::norm(alpha) * (w - 2.0 - w * n1 * ch) +
                    w * n1 * (alpha * alpha * std::exp(cdouble(0.0, -theta))).real() * sh;
  const cdouble d = 1.0 - w + w * w * (0.5 + mu_thermal + mu_thermal * mu_thermal) -
                    n1 * (0.5 * w * w - w) * ch;
  return std::exp(0.5 * w * e / d) / std::sqrt(d);
}

/// Pair-number distribution of M equally strong two-mode squeezers with
/// total mean pair number mu: a negative binomial,
///   p(n) = C(n+M-1, n) sech^{2M}(r) tanh^{2n}(r), sinh^2(r) = mu / M.
inline double analytic_spdc_pair_pnd(double mu_total, int m, int n) {
  if (m < 1) throw domain_error("need at least one squeezer");
  const double r = std::asinh(std::sqrt(mu_total / m));
  const double q = std::pow(std::tanh(r), 2);
  double binom = 1.0;
  for (int i = 1; i <= n; ++i) binom *= static_cast<double>(m - 1 + i) / i;
  return binom * std::pow(1.0 / (std::cosh(r) * std::cosh(r)), m) * std::pow(q, n);
}

inline double poisson_pnd(double mu, int n) {
  return std::exp(-mu) * std::pow(mu, n) / factorial(n);
}

/// Exact joint detector PND of a mixture: squared amplitudes, per-mode
/// binomial thinning by eta, aggregation of each detector's modes, Poisson
/// noise per detector. `detector_modes[d]` lists the modes of detector d,
/// `eta[d]` the per-mode efficiencies, dims[d] the table size.
inline PndTable oracle_pnd(const FockMixture& mix,
                           const std::vector<std::vector<int>>& detector_modes,
                           const std::vector<std::vector<double>>& etas,
                           const std::vector<double>& nus, const std::vector<int>& dims) {
  const std::size_t dcount = detector_modes.size();
  if (etas.size() != dcount || nus.size() != dcount || dims.size() != dcount)
    throw domain_error("oracle_pnd argument length mismatch");

  PndTable out;
  out.dims = dims;
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  out.p.assign(total, 0.0);
  out.mass_defect = mix.mass_defect;
  std::vector<int> cd(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) cd[i] = dims[i] - 1;
  auto out_strides = detail::strides_for(cd);

  for (const auto& [w, s] : mix.components) {
    const int modes = static_cast<int>(s.cutoff.size());
    std::vector<int> idx(static_cast<std::size_t>(modes), 0);
    for (std::size_t f = 0; f < s.amp.size(); ++f) {
      double p = w * std::norm(s.amp[f]);
      if (p > 0.0) {
        // thin each detected mode, distribute over detector counts
        // enumerate thinned outcomes recursively over the detectors' modes
        struct Rec {
          const FockState& s;
          const std::vector<std::vector<int>>& dmodes;
          const std::vector<std::vector<double>>& etas;
          const std::vector<int>& idx;
          PndTable& out;
          const std::vector<std::size_t>& strides;
          void go(std::size_t d, std::size_t mi, int count, std::size_t base, double prob) {
            if (d == dmodes.size()) {
              out.p[base] += prob;
              return;
            }
            if (mi == dmodes[d].size()) {
              if (count >= out.dims[d]) {
                out.mass_defect += prob;
                return;
              }
              go(d + 1, 0, 0, base + static_cast<std::size_t>(count) * strides[d], prob);
              return;
            }
            int n = idx[static_cast<std::size_t>(dmodes[d][mi])];
            double eta = etas[d][mi];
            if (eta == 1.0) {
              go(d, mi + 1, count + n, base, prob);
              return;
            }
            for (int k = 0; k <= n; ++k) {
              double b = detail::binomial(n, k) * std::pow(eta, k) * std::pow(1.0 - eta, n - k);
              go(d, mi + 1, count + k, base, prob * b);
            }
          }
        } rec{s, detector_modes, etas, idx, out, out_strides};
        rec.go(0, 0, 0, 0, p);
      }
      for (int m = modes - 1; m >= 0; --m) {
        if (++idx[static_cast<std::size_t>(m)] <= s.cutoff[static_cast<std::size_t>(m)]) break;
        idx[static_cast<std::size_t>(m)] = 0;
      }
    }
  }
  for (std::size_t d = 0; d < dcount; ++d)
    out = poisson_convolve(out, static_cast<int>(d), nus[d]);
  return out;
}

}  // namespace gphot::oracle
