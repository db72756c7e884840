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
#include <array>
#include <map>
#include <string>
#include <vector>

#include "gphot/common.hpp"
#include "gphot/statistics.hpp"

namespace gphot {

/// Physical parameters of a non-photon-number-resolving click detector.
struct DetectorSpec {
  double efficiency = 1.0;       // eta
  double dark_rate = 0.0;        // counts / s
  double afterpulse_prob = 0.0;  // probability that a click triggers another
  double dead_time = 0.0;        // s
  double rep_rate = 1.0;         // repetition cycles / s
  double bin_width = 1e-9;       // s, width of one time bin
};

inline void validate(const DetectorSpec& s) {
  if (s.efficiency < 0.0 || s.efficiency > 1.0)
    throw domain_error("detector efficiency must be in [0, 1]");
  if (s.dark_rate < 0.0) throw domain_error("dark rate must be >= 0");
  if (s.afterpulse_prob < 0.0 || s.afterpulse_prob >= 1.0)
    throw domain_error("afterpulse probability must be in [0, 1)");
  if (s.dead_time < 0.0) throw domain_error("dead time must be >= 0");
  if (s.rep_rate <= 0.0) throw domain_error("repetition rate must be > 0");
  if (s.bin_width <= 0.0) throw domain_error("bin width must be > 0");
}

/// Output of the noise self-consistency solve for one detector.
struct NoiseSolution {
  double r_noise = 0.0;   // dark + afterpulse rate, counts / s
  double nu_cycle = 0.0;  // noise parameter per repetition cycle
  double nu_bin = 0.0;    // noise parameter per time bin
  double p_click = 0.0;   // click probability per repetition cycle
  double r_click = 0.0;   // click rate, counts / s
  double p_on = 0.0;      // probability the detector is not dead
};

/// Probability to find zero photons in the given modes with efficiencies
/// applied (no noise): a single scalar evaluation of the generating function
/// at w = eta. This is the exp(-nu)-free part of the no-click probability.
inline double vacuum_probability(const GaussianState& state, const std::vector<int>& modes,
                                 const std::vector<double>& etas) {
  DetectorPartition part;
  part.detectors.push_back({modes, etas, 0.0});
  auto red = detail::marginalize(state, part);
  Context ctx = make_context({});
  GArgs args;
  args.w.assign(static_cast<std::size_t>(red.state.modes), Series(ctx));
  for (std::size_t i = 0; i < red.detectors[0].modes.size(); ++i)
    args.w[static_cast<std::size_t>(red.detectors[0].modes[i])] =
        Series(ctx, red.detectors[0].eta[i]);
  return clamp_probability(real_checked(eval_G(red.state, args).constant_term()));
}

/// Solve the noise self-consistency
///   r_noise = r_dark + p_ap f_rep (1 - exp(-r_noise/f_rep) p0)
/// exactly by damped fixed-point iteration (p0 is the no-photon probability
/// of the light reaching the detector, 1/sqrt(det Lambda) for undisplaced
/// states). The linearized closed form is available separately as a check;
/// the exact value is the one used.
inline NoiseSolution self_consistent_noise(const DetectorSpec& spec, double p0) {
  validate(spec);
  if (p0 < 0.0 || p0 > 1.0 + 1e-12) throw domain_error("vacuum probability must be in [0, 1]");
  if (spec.afterpulse_prob * p0 >= 1.0)
    throw numeric_error("noise self-consistency has no solution: p_ap * p0 >= 1");

  const double f = spec.rep_rate;
  double r = spec.dark_rate;  // starting guess: no afterpulses
  bool converged = false;
  for (int it = 0; it < 400 && !converged; ++it) {
    double target = spec.dark_rate +
                    spec.afterpulse_prob * f * (1.0 - std::exp(-r / f) * p0);
    double residual = target - r;
    converged = std::abs(residual) <= 1e-14 * std::max(1.0, std::abs(target));
    r += 0.5 * residual;  // damped step; the map is contractive for p_ap p0 < 1
  }
  if (!converged) throw numeric_error("noise self-consistency iteration did not converge");

  NoiseSolution n;
  n.r_noise = r;
  n.nu_cycle = r / f;
  n.nu_bin = r * spec.bin_width;
  n.p_click = 1.0 - std::exp(-n.nu_cycle) * p0;
  n.r_click = n.p_click * f;
  n.p_on = 1.0 / (1.0 + n.r_click * spec.dead_time);
  return n;
}

/// First-order (linearized) noise rate,
///   r_noise ~ (r_dark + p_ap f (1 - p0)) / (1 - p_ap p0).
/// Kept as the small-rate consistency check against the exact fixed point.
inline double linearized_noise_rate(const DetectorSpec& spec, double p0) {
  validate(spec);
  return (spec.dark_rate + spec.afterpulse_prob * spec.rep_rate * (1.0 - p0)) /
         (1.0 - spec.afterpulse_prob * p0);
}

// ---------------------------------------------------------------------------
// time-binned click detectors and the coincidence event algebra

enum class Bin { early = 0, central = 1, late = 2 };

/// A click detector observing three time-bin mode groups of one state. A
/// click in a bin switches the detector off for the remaining bins of the
/// cycle, so the four outcomes E, C, L, no-click are mutually exclusive.
struct TimeBinnedDetector {
  std::string name;
  std::array<std::vector<int>, 3> bin_modes;  // state modes per bin
  double efficiency = 1.0;                    // applied to every mode
  std::array<double, 3> nu_bins{0.0, 0.0, 0.0};  // Poisson noise per bin
  double p_on = 1.0;                          // live probability
};

/// One detector's outcome inside a joint event.
struct Outcome {
  enum Kind {
    any,         // identity: no condition on this detector
    click,       // click in `bin` (exclusive within the cycle)
    no_click,    // exact no-click operator p_off + p_on Pi_0
    silent_all,  // zero photons in all three bins (approximate no-click)
  };
  Kind kind = any;
  Bin bin = Bin::early;
};

inline Outcome click_in(Bin b) { return {Outcome::click, b}; }
inline Outcome no_click() { return {Outcome::no_click, Bin::early}; }
inline Outcome silent() { return {Outcome::silent_all, Bin::early}; }
inline Outcome any_outcome() { return {Outcome::any, Bin::early}; }

namespace detail {

// Additive term of an expanded detection operator: coefficient times a
// vacuum projector over some of the detector's bins.
struct PovmTerm {
  double coeff;
  std::array<bool, 3> zero_bins;  // bins required to contain zero photons
};

inline std::vector<PovmTerm> expand_outcome(const TimeBinnedDetector& det, const Outcome& out,
                                            bool exact_no_click) {
  const double pon = det.p_on;
  switch (out.kind) {
    case Outcome::any:
      return {{1.0, {false, false, false}}};
    case Outcome::click:
      switch (out.bin) {
        case Bin::early:  // p_on (1 - Pi_{E=0})
          return {{pon, {false, false, false}}, {-pon, {true, false, false}}};
        case Bin::central:  // p_on (Pi_{E=0} - Pi_{EC=0})
          return {{pon, {true, false, false}}, {-pon, {true, true, false}}};
        case Bin::late:  // p_on (Pi_{EC=0} - Pi_{ECL=0})
          return {{pon, {true, true, false}}, {-pon, {true, true, true}}};
      }
      break;
    case Outcome::no_click:
      if (exact_no_click)  // p_off + p_on Pi_{ECL=0}
        return {{1.0 - pon, {false, false, false}}, {pon, {true, true, true}}};
      return {{1.0, {true, true, true}}};
    case Outcome::silent_all:
      return {{1.0, {true, true, true}}};
  }
  return {};
}

}  // namespace detail

/// Probability of a joint detection event: one outcome per detector, all
/// other modes marginalized. The event is expanded into signed products of
/// vacuum projectors; every distinct projector is one scalar generating-
/// function evaluation (cached across terms).
inline double coincidence_probability(const GaussianState& state,
                                      const std::vector<TimeBinnedDetector>& detectors,
                                      const std::vector<Outcome>& outcomes,
                                      bool exact_no_click = true) {
  if (outcomes.size() != detectors.size())
    throw domain_error("one outcome per detector required");
  {
    std::set<int> seen;
    for (const auto& det : detectors)
      for (const auto& bin : det.bin_modes)
        for (int m : bin)
          if (!seen.insert(m).second)
            throw domain_error("mode shared between detector bins");
  }

  std::vector<std::vector<detail::PovmTerm>> expanded;
  for (std::size_t i = 0; i < detectors.size(); ++i)
    expanded.push_back(detail::expand_outcome(detectors[i], outcomes[i], exact_no_click));

  // enumerate term combinations across detectors
  double total = 0.0;
  std::vector<std::size_t> pick(detectors.size(), 0);
  std::map<std::vector<int>, double> cache;
  while (true) {
    double coeff = 1.0;
    double nu_sum = 0.0;
    std::vector<int> modes;
    std::vector<double> etas;
    for (std::size_t i = 0; i < detectors.size(); ++i) {
      const auto& term = expanded[i][pick[i]];
      coeff *= term.coeff;
      for (int b = 0; b < 3; ++b) {
        if (!term.zero_bins[static_cast<std::size_t>(b)]) continue;
        nu_sum += detectors[i].nu_bins[static_cast<std::size_t>(b)];
        for (int m : detectors[i].bin_modes[static_cast<std::size_t>(b)]) {
          modes.push_back(m);
          etas.push_back(detectors[i].efficiency);
        }
      }
    }
    if (coeff != 0.0) {
      double p0;
      if (modes.empty()) {
        p0 = 1.0;
      } else {
        // sort for cache identity; eta follows its mode
        std::vector<std::size_t> idx(modes.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
          return modes[a] < modes[b];
        });
        std::vector<int> sm(modes.size());
        std::vector<double> se(modes.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
          sm[i] = modes[idx[i]];
          se[i] = etas[idx[i]];
        }
        auto it = cache.find(sm);
        if (it == cache.end()) it = cache.emplace(sm, vacuum_probability(state, sm, se)).first;
        p0 = it->second;
      }
      total += coeff * std::exp(-nu_sum) * p0;
    }
    // odometer over term picks
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < expanded[i].size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) break;
  }
  return clamp_probability(total);
}

/// Probability that one detector clicks (exclusively) in the given bin.
inline double bin_click_probability(const GaussianState& state, const TimeBinnedDetector& det,
                                    Bin bin) {
  return coincidence_probability(state, {det}, {click_in(bin)});
}

/// Probability that the detector does not click during the cycle.
inline double no_click_probability(const GaussianState& state, const TimeBinnedDetector& det,
                                   bool exact_no_click = true) {
  return coincidence_probability(state, {det}, {no_click()}, exact_no_click);
}

}  // namespace gphot
