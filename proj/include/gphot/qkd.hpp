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

// Time-bin entanglement QKD scenario: a central SPDC pair source pumped by
// double pulses feeds two users through an unfolded network in which every
// time bin is a separate mode. Each user's imbalanced interferometer maps
// (pump pulse, receiver path) onto early/central/late detection bins; the
// two central-bin paths interfere, carrying the phase-basis information.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "gphot/detection.hpp"
#include "gphot/gaussian.hpp"
#include "gphot/statistics.hpp"

namespace gphot {

struct PumpConfig {
  double t_p1 = 0.5;    // source interferometer input coupling
  double t_p2 = 0.5;    // source interferometer output coupling
  double loss_ps = 0.0; // short pump arm loss fraction
  double loss_pl = 0.0; // long pump arm loss fraction
  double phase = 0.0;   // pump interferometer phase (enters the late squeezer)
};

struct QkdUserConfig {
  double fiber_km = 0.0;
  double fiber_db_per_km = 0.2;
  double insertion_db = 0.0;  // lumped component / WDM / coupling losses
  double t_split = 0.5;       // receiver interferometer input coupling
  double t_combine = 0.5;     // receiver interferometer output coupling
  double visibility = 1.0;    // central-bin mode overlap V
  double phase = 0.0;         // receiver interferometer phase (long arm)
  DetectorSpec det0, det1;
};

struct SpectralConfig {
  // channel-averaged transmissions; the frequency correlation of the pair
  // makes the pair transmission differ from the product of the singles
  double tau_a = 1.0;
  double tau_b = 1.0;
  double tau_pair = 1.0;
};

struct ScenarioConfig {
  double mu = 0.034;    // total mean photon pair number per double pulse
  int schmidt_k = 100;  // number of equal independent two-mode squeezers
  double f_rep = 1e8;   // repetition rate (double pulses / s)
  PumpConfig pump;
  QkdUserConfig alice, bob;
  SpectralConfig spectral;
  bool exact_povm = true;    // exact no-click operator vs the 4-term shortcut
  int phase_pairing = 0;     // 0: correct central coincidences are (A0,B0)+(A1,B1)
};

inline void validate(const ScenarioConfig& cfg) {
  if (cfg.mu <= 0.0) throw domain_error("mean pair number must be > 0");
  if (cfg.schmidt_k < 1) throw domain_error("schmidt multiplicity must be >= 1");
  if (cfg.f_rep <= 0.0) throw domain_error("repetition rate must be > 0");
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(cfg.pump.t_p1) || !in01(cfg.pump.t_p2) || !in01(cfg.pump.loss_ps) ||
      !in01(cfg.pump.loss_pl))
    throw domain_error("pump couplings and losses must be in [0, 1]");
  for (const auto* u : {&cfg.alice, &cfg.bob}) {
    if (u->fiber_km < 0.0 || u->fiber_db_per_km < 0.0 || u->insertion_db < 0.0)
      throw domain_error("losses must be >= 0");
    if (!in01(u->t_split) || !in01(u->t_combine) || !in01(u->visibility))
      throw domain_error("receiver couplings and visibility must be in [0, 1]");
    validate(u->det0);
    validate(u->det1);
  }
  if (cfg.spectral.tau_a <= 0.0 || cfg.spectral.tau_b <= 0.0 || cfg.spectral.tau_pair <= 0.0)
    throw domain_error("spectral transmissions must be > 0");
  if (cfg.phase_pairing != 0 && cfg.phase_pairing != 1)
    throw domain_error("phase_pairing must be 0 or 1");
}

/// Key-rate correction for the frequency correlation of the photon pair
/// across the wavelength channels: tau_pair / (tau_A tau_B). Flat channels
/// give exactly 1.
inline double spectral_correction(const ScenarioConfig& cfg) {
  return cfg.spectral.tau_pair / (cfg.spectral.tau_a * cfg.spectral.tau_b);
}

/// The per-copy squeezing magnitudes of the early and late squeezer: the
/// pump interferometer asymmetry is absorbed into chi_S and chi_L, and the
/// overall scale r0 is set so that schmidt_k copies together emit mu pairs
/// per double pulse.
struct SourceSqueezing {
  double r_s = 0.0;
  double r_l = 0.0;
};

inline SourceSqueezing solve_source_squeezing(const ScenarioConfig& cfg) {
  const double c_s =
      std::sqrt(cfg.pump.t_p1 * (1.0 - cfg.pump.loss_ps) * cfg.pump.t_p2);
  const double c_l = std::sqrt((1.0 - cfg.pump.t_p1) * (1.0 - cfg.pump.loss_pl) *
                               (1.0 - cfg.pump.t_p2));
  if (c_s <= 0.0 && c_l <= 0.0) throw domain_error("pump couplings emit no light");
  const double k = static_cast<double>(cfg.schmidt_k);
  auto pairs = [&](double r0) {
    return k * (std::pow(std::sinh(r0 * c_s), 2) + std::pow(std::sinh(r0 * c_l), 2));
  };
  double lo = 0.0, hi = 1.0;
  while (pairs(hi) < cfg.mu) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (pairs(mid) < cfg.mu ? lo : hi) = mid;
  }
  double r0 = 0.5 * (lo + hi);
  return {r0 * c_s, r0 * c_l};
}

/// Fully assembled scenario: the Gaussian state of all time-bin and ancilla
/// modes (one Schmidt block, replicated via the copy multiplicity) plus the
/// four time-binned detectors A0, A1, B0, B1 with their solved noise.
struct QkdNetwork {
  GaussianState state;
  std::array<TimeBinnedDetector, 4> detectors;  // A0, A1, B0, B1
  std::array<NoiseSolution, 4> noise;
  SourceSqueezing squeezing;
  // source mode indices inside the block (pulse-1/pulse-2, per user)
  int a_in1 = 0, b_in1 = 1, a_in2 = 2, b_in2 = 3;
};

namespace detail {

struct ReceiverModes {
  // detector 0: E, C (matched + two unmatched), L; detector 1 alike
  std::array<std::vector<int>, 3> d0_bins;
  std::array<std::vector<int>, 3> d1_bins;
};

/// Unfold one user's receiver. `in1`/`in2` carry the photon from the first/
/// second pump pulse; `anc` is the base index of this user's eight vacuum
/// ancilla modes. Short paths keep the input index, long paths move to the
/// first ancilla pair. The central-bin mode mismatch splits each interfering
/// path into a matched part (amplitude sqrt(V), interferes) and an
/// orthogonal part routed to the same detectors without interference.
inline ReceiverModes apply_receiver(GaussianState& st, const QkdUserConfig& user, int in1,
                                    int in2, int anc) {
  const int modes = st.modes;
  const int anc_bs1 = anc, anc_bs2 = anc + 1, anc_m1 = anc + 2, anc_m2 = anc + 3,
            anc_e = anc + 4, anc_l = anc + 5, anc_u1 = anc + 6, anc_u2 = anc + 7;

  const double t_link = std::pow(10.0, -(user.fiber_km * user.fiber_db_per_km +
                                         user.insertion_db) / 10.0);
  st = loss_channel(st, in1, t_link);
  st = loss_channel(st, in2, t_link);

  // input splitter: transmitted = short path (keeps index), reflected = long
  st = apply(beamsplitter(modes, in1, anc_bs1, user.t_split), st);
  st = apply(beamsplitter(modes, in2, anc_bs2, user.t_split), st);
  st = apply(phase_shift(modes, anc_bs1, user.phase), st);
  st = apply(phase_shift(modes, anc_bs2, user.phase), st);

  // central-bin mode mismatch: matched fraction stays, rest moves aside
  st = apply(beamsplitter(modes, anc_bs1, anc_m1, user.visibility), st);
  st = apply(beamsplitter(modes, in2, anc_m2, user.visibility), st);

  // output splitter: interference of the matched central-bin paths; early
  // and late bins and the unmatched parts split with the same coupling but
  // against vacuum
  st = apply(beamsplitter(modes, anc_bs1, in2, user.t_combine), st);
  st = apply(beamsplitter(modes, in1, anc_e, user.t_combine), st);
  st = apply(beamsplitter(modes, anc_bs2, anc_l, user.t_combine), st);
  st = apply(beamsplitter(modes, anc_m1, anc_u1, user.t_combine), st);
  st = apply(beamsplitter(modes, anc_m2, anc_u2, user.t_combine), st);

  ReceiverModes r;
  r.d0_bins = {{{in1}, {anc_bs1, anc_m1, anc_m2}, {anc_bs2}}};
  r.d1_bins = {{{anc_e}, {in2, anc_u1, anc_u2}, {anc_l}}};
  return r;
}

}  // namespace detail

inline QkdNetwork build_network(const ScenarioConfig& cfg) {
  validate(cfg);
  QkdNetwork net;
  net.squeezing = solve_source_squeezing(cfg);

  const int total_modes = 20;  // 4 source + 8 ancillas per user
  GaussianState st = vacuum(total_modes);
  st = apply(two_mode_squeezer(total_modes, net.a_in1, net.b_in1, net.squeezing.r_s, 0.0), st);
  st = apply(two_mode_squeezer(total_modes, net.a_in2, net.b_in2, net.squeezing.r_l,
                               cfg.pump.phase),
             st);

  auto alice_modes = detail::apply_receiver(st, cfg.alice, net.a_in1, net.a_in2, 4);
  auto bob_modes = detail::apply_receiver(st, cfg.bob, net.b_in1, net.b_in2, 12);
  st.copies = cfg.schmidt_k;
  net.state = st;

  const std::array<const QkdUserConfig*, 2> users{&cfg.alice, &cfg.bob};
  const std::array<std::string, 4> names{"A0", "A1", "B0", "B1"};
  for (int u = 0; u < 2; ++u) {
    const auto& recv = (u == 0) ? alice_modes : bob_modes;
    for (int d = 0; d < 2; ++d) {
      const DetectorSpec& spec = (d == 0) ? users[static_cast<std::size_t>(u)]->det0
                                          : users[static_cast<std::size_t>(u)]->det1;
      TimeBinnedDetector det;
      det.name = names[static_cast<std::size_t>(2 * u + d)];
      det.bin_modes = (d == 0) ? recv.d0_bins : recv.d1_bins;
      det.efficiency = spec.efficiency;

      // noise self-consistency over the full cycle: only this detector's
      // modes stay in the covariance matrix
      std::vector<int> all_modes;
      for (const auto& bin : det.bin_modes)
        all_modes.insert(all_modes.end(), bin.begin(), bin.end());
      DetectorSpec cycle_spec = spec;
      cycle_spec.rep_rate = cfg.f_rep;
      double p0 = vacuum_probability(net.state, all_modes,
                                     std::vector<double>(all_modes.size(), spec.efficiency));
      NoiseSolution sol = self_consistent_noise(cycle_spec, p0);
      det.nu_bins = {sol.nu_bin, sol.nu_bin, sol.nu_bin};
      det.p_on = sol.p_on;
      net.detectors[static_cast<std::size_t>(2 * u + d)] = det;
      net.noise[static_cast<std::size_t>(2 * u + d)] = sol;
    }
  }
  return net;
}

/// Per-cycle exclusive coincidence probabilities of the sifted bases.
struct CoincidenceBreakdown {
  double time_correct = 0.0;  // (E,E) and (L,L) patterns
  double time_error = 0.0;    // (E,L) and (L,E)
  double phase_correct = 0.0; // central-bin pairs in the correct pairing
  double phase_error = 0.0;
};

struct QkdMetrics {
  double key_rate = 0.0;  // sifted bits / s, spectral correction applied
  double time_qber = 0.0;
  CoincidenceBreakdown coincidences;
  SourceSqueezing squeezing;
};

namespace detail {

inline double exclusive_coincidence(const QkdNetwork& net, int alice_det, Bin bin_a,
                                    int bob_det, Bin bin_b, bool exact_povm) {
  std::vector<TimeBinnedDetector> dets(net.detectors.begin(), net.detectors.end());
  std::vector<Outcome> outs(4, no_click());
  outs[static_cast<std::size_t>(alice_det)] = click_in(bin_a);
  outs[static_cast<std::size_t>(2 + bob_det)] = click_in(bin_b);
  return coincidence_probability(net.state, dets, outs, exact_povm);
}

}  // namespace detail

inline CoincidenceBreakdown coincidence_breakdown(const QkdNetwork& net,
                                                  const ScenarioConfig& cfg) {
  CoincidenceBreakdown b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      b.time_correct +=
          detail::exclusive_coincidence(net, i, Bin::early, j, Bin::early, cfg.exact_povm) +
          detail::exclusive_coincidence(net, i, Bin::late, j, Bin::late, cfg.exact_povm);
      b.time_error +=
          detail::exclusive_coincidence(net, i, Bin::early, j, Bin::late, cfg.exact_povm) +
          detail::exclusive_coincidence(net, i, Bin::late, j, Bin::early, cfg.exact_povm);
      double central =
          detail::exclusive_coincidence(net, i, Bin::central, j, Bin::central, cfg.exact_povm);
      const bool same_pair = (i == j) == (cfg.phase_pairing == 0);
      (same_pair ? b.phase_correct : b.phase_error) += central;
    }
  return b;
}

inline QkdMetrics simulate(const ScenarioConfig& cfg) {
  QkdNetwork net = build_network(cfg);
  QkdMetrics m;
  m.squeezing = net.squeezing;
  m.coincidences = coincidence_breakdown(net, cfg);
  const double denom = m.coincidences.time_correct + m.coincidences.time_error;
  if (denom <= 1e-200) throw numeric_error("no time-basis coincidences in this scenario");
  m.time_qber = m.coincidences.time_error / denom;
  m.key_rate = cfg.f_rep *
               (m.coincidences.time_correct + m.coincidences.phase_correct) *
               spectral_correction(cfg);
  return m;
}

/// Sifted key rate in bits/s: repetition rate times the exclusive correct
/// coincidence probabilities of both bases, spectrally corrected.
inline double sifted_key_rate(const ScenarioConfig& cfg) { return simulate(cfg).key_rate; }

/// Fraction of time-basis coincidences that carry the wrong bin pattern.
inline double time_qber(const ScenarioConfig& cfg) { return simulate(cfg).time_qber; }

/// Bayesian retrodiction of the pair numbers (f, s) emitted by the two pump
/// pulses, conditioned on the error coincidence "A0 clicks early and B0
/// clicks late":
///   p(f, s | A_{0,E}, B_{0,L}) = p(A|f) p(B|s) p(f) p(s) / p(A_{0,E}, B_{0,L}).
/// The single-photon detection probabilities use the photon's total path
/// transmission, p_on (1 - e^{-nu} (1 - T)); f = 0 or s = 0 reduce to the
/// noise-count probability (T = 0).
struct RetrodictionResult {
  double mu = 0.0;
  double p00 = 0.0, p01 = 0.0, p10 = 0.0, p11 = 0.0;
  double complement = 0.0;  // pair numbers beyond one per pulse
};

namespace detail {

/// Total transmission from a source mode to one detector bin, measured by
/// propagating a unit-mean probe through the same network (includes every
/// splitter, loss, and the detector efficiency).
inline double probe_transmission(const ScenarioConfig& cfg, bool alice_side, bool first_pulse,
                                 int det_index, Bin bin) {
  const int total_modes = 20;
  GaussianState st = vacuum(total_modes);
  int probe_mode = alice_side ? (first_pulse ? 0 : 2) : (first_pulse ? 1 : 3);
  st = apply(displacement(total_modes, probe_mode, cdouble(1.0, 0.0)), st);
  auto alice_modes = detail::apply_receiver(st, cfg.alice, 0, 2, 4);
  auto bob_modes = detail::apply_receiver(st, cfg.bob, 1, 3, 12);

  const auto& recv = alice_side ? alice_modes : bob_modes;
  const auto& bins = (det_index == 0) ? recv.d0_bins : recv.d1_bins;
  const auto& modes = bins[static_cast<std::size_t>(bin)];
  const DetectorSpec& spec =
      alice_side ? (det_index == 0 ? cfg.alice.det0 : cfg.alice.det1)
                 : (det_index == 0 ? cfg.bob.det0 : cfg.bob.det1);
  Detector d{modes, std::vector<double>(modes.size(), spec.efficiency), 0.0};
  return moments(st, DetectorPartition{{d}}, {1}, {0.0});
}

}  // namespace detail

inline RetrodictionResult retrodict(const ScenarioConfig& cfg) {
  QkdNetwork net = build_network(cfg);

  // pair-number statistics of each pump pulse: schmidt_k equal squeezers
  GaussianState pulse1 = tmsv(net.squeezing.r_s);
  pulse1.copies = cfg.schmidt_k;
  GaussianState pulse2 = tmsv(net.squeezing.r_l);
  pulse2.copies = cfg.schmidt_k;
  DetectorPartition signal_arm{{Detector{{0}, {1.0}, 0.0}}};
  const double pf0 = pnd(pulse1, signal_arm, {0});
  const double pf1 = pnd(pulse1, signal_arm, {1});
  const double ps0 = pnd(pulse2, signal_arm, {0});
  const double ps1 = pnd(pulse2, signal_arm, {1});

  // single-photon path transmissions for the two clicks of the error
  // coincidence: A0 early collects the first pulse, B0 late the second
  const double t_a = detail::probe_transmission(cfg, true, true, 0, Bin::early);
  const double t_b = detail::probe_transmission(cfg, false, false, 0, Bin::late);

  const auto& a0 = net.detectors[0];
  const auto& b0 = net.detectors[2];
  auto click_given = [](const TimeBinnedDetector& det, Bin bin, double t) {
    return det.p_on * (1.0 - std::exp(-det.nu_bins[static_cast<std::size_t>(bin)]) * (1.0 - t));
  };
  const double pa1 = click_given(a0, Bin::early, t_a);
  const double pa0 = click_given(a0, Bin::early, 0.0);
  const double pb1 = click_given(b0, Bin::late, t_b);
  const double pb0 = click_given(b0, Bin::late, 0.0);

  // raw coincidence probability between A0 early and B0 late
  std::vector<TimeBinnedDetector> dets(net.detectors.begin(), net.detectors.end());
  std::vector<Outcome> outs{click_in(Bin::early), any_outcome(), click_in(Bin::late),
                            any_outcome()};
  const double denom = coincidence_probability(net.state, dets, outs, cfg.exact_povm);
  if (denom <= 0.0) throw numeric_error("vanishing coincidence probability in retrodiction");

  RetrodictionResult r;
  r.mu = cfg.mu;
  r.p00 = pa0 * pb0 * pf0 * ps0 / denom;
  r.p01 = pa0 * pb1 * pf0 * ps1 / denom;
  r.p10 = pa1 * pb0 * pf1 * ps0 / denom;
  r.p11 = pa1 * pb1 * pf1 * ps1 / denom;
  r.complement = 1.0 - r.p00 - r.p01 - r.p10 - r.p11;
  return r;
}

}  // namespace gphot
