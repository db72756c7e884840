#include <catch2/catch_amalgamated.hpp>

#include "gphot/qkd.hpp"

using gphot::Bin;
using gphot::ScenarioConfig;

namespace {

ScenarioConfig clean_scenario(double mu) {
  ScenarioConfig cfg;
  cfg.mu = mu;
  cfg.schmidt_k = 1;
  cfg.f_rep = 1e8;
  for (auto* u : {&cfg.alice, &cfg.bob}) {
    u->fiber_km = 0.0;
    u->insertion_db = 0.0;
    u->visibility = 1.0;
    for (auto* d : {&u->det0, &u->det1}) {
      d->efficiency = 1.0;
      d->dark_rate = 0.0;
      d->afterpulse_prob = 0.0;
      d->dead_time = 0.0;
      d->bin_width = 1e-9;
    }
  }
  return cfg;
}

ScenarioConfig realistic_scenario(double mu) {
  ScenarioConfig cfg;
  cfg.mu = mu;
  cfg.schmidt_k = 100;
  cfg.f_rep = 1e8;
  cfg.alice.fiber_km = 26.9;
  cfg.bob.fiber_km = 50.0;
  for (auto* u : {&cfg.alice, &cfg.bob}) {
    u->insertion_db = 10.0;
    u->visibility = 0.98;
    for (auto* d : {&u->det0, &u->det1}) {
      d->efficiency = 0.2;
      d->afterpulse_prob = 0.03;
      d->dead_time = 10e-6;
      d->bin_width = 1e-9;
    }
  }
  cfg.alice.det0.dark_rate = 3045.0;
  cfg.alice.det1.dark_rate = 1500.0;
  cfg.bob.det0.dark_rate = 606.0;
  cfg.bob.det1.dark_rate = 800.0;
  return cfg;
}

}  // namespace

TEST_CASE("source squeezing reproduces the requested pair number", "[qkd]") {
  auto cfg = realistic_scenario(0.034);
  auto sq = gphot::solve_source_squeezing(cfg);
  double pairs = cfg.schmidt_k * (std::pow(std::sinh(sq.r_s), 2) +
                                  std::pow(std::sinh(sq.r_l), 2));
  CHECK(pairs == Catch::Approx(0.034).epsilon(1e-10));

  // schmidt multiplicity shifts the pair statistics thermal -> Poisson
  auto one = cfg;
  one.schmidt_k = 1;
  auto sq1 = gphot::solve_source_squeezing(one);
  gphot::GaussianState block1 = gphot::tmsv(sq1.r_s);
  gphot::DetectorPartition arm{{gphot::Detector{{0}, {1.0}, 0.0}}};
  double mu1 = gphot::moments(block1, arm, {1}, {0.0});
  // thermal law for a single squeezer
  CHECK(gphot::pnd(block1, arm, {1}) ==
        Catch::Approx(mu1 / std::pow(1.0 + mu1, 2)).epsilon(1e-10));
}

TEST_CASE("ideal interference concentrates phase coincidences", "[qkd]") {
  auto cfg = clean_scenario(1e-3);
  auto metrics = gphot::simulate(cfg);
  CHECK(metrics.coincidences.phase_correct > 0.0);
  // residual errors only from multi-pair emission, suppressed by mu
  CHECK(metrics.coincidences.phase_error / metrics.coincidences.phase_correct < 0.05);
  CHECK(metrics.time_qber < 0.05);
  CHECK(metrics.key_rate > 0.0);
}

TEST_CASE("noise-dominated limit drives the time QBER to one half", "[qkd]") {
  // mu far below the dark-dark accidental level: uniform coincidences
  auto cfg = clean_scenario(1e-15);
  for (auto* u : {&cfg.alice, &cfg.bob})
    for (auto* d : {&u->det0, &u->det1}) d->dark_rate = 10000.0;
  auto metrics = gphot::simulate(cfg);
  CHECK(metrics.time_qber == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("fiber loss halves the coincidence rate in the linear regime", "[qkd]") {
  auto cfg = clean_scenario(1e-3);
  cfg.alice.insertion_db = 3.0103;  // a factor of two in transmission
  auto base = gphot::simulate(clean_scenario(1e-3));
  auto lossy = gphot::simulate(cfg);
  CHECK(lossy.coincidences.time_correct / base.coincidences.time_correct ==
        Catch::Approx(0.5).epsilon(0.02));
}

TEST_CASE("key rate falls with distance, QBER stays bounded", "[qkd]") {
  double last_rate = 1e18;
  for (double km : {0.0, 20.0, 40.0}) {
    auto cfg = realistic_scenario(0.034);
    cfg.alice.fiber_km = km;
    cfg.bob.fiber_km = km;
    auto m = gphot::simulate(cfg);
    CHECK(m.key_rate < last_rate);
    CHECK(m.time_qber >= 0.0);
    CHECK(m.time_qber <= 1.0);
    last_rate = m.key_rate;
  }
}

TEST_CASE("alice-bob swap symmetry", "[qkd]") {
  auto cfg = realistic_scenario(0.05);
  cfg.bob = cfg.alice;  // fully symmetric network
  auto m = gphot::simulate(cfg);
  auto swapped = cfg;
  std::swap(swapped.alice, swapped.bob);
  auto ms = gphot::simulate(swapped);
  CHECK(m.key_rate == Catch::Approx(ms.key_rate).epsilon(1e-10));
  CHECK(m.time_qber == Catch::Approx(ms.time_qber).epsilon(1e-10));
}

TEST_CASE("retrodiction limits", "[qkd]") {
  // no noise anywhere: a coincidence can never come from zero pairs
  auto clean = clean_scenario(0.01);
  auto r = gphot::retrodict(clean);
  CHECK(r.p00 == Catch::Approx(0.0).margin(1e-15));
  CHECK(r.p01 == Catch::Approx(0.0).margin(1e-15));
  CHECK(r.p10 == Catch::Approx(0.0).margin(1e-15));
  CHECK(r.p11 > 0.5);
  CHECK(r.p00 + r.p01 + r.p10 + r.p11 + r.complement == Catch::Approx(1.0).margin(1e-10));

  // vanishing mu with dark counts: dark-dark coincidences dominate
  auto dark = realistic_scenario(1e-5);
  auto rd = gphot::retrodict(dark);
  CHECK(rd.p00 > rd.p01);
  CHECK(rd.p00 > rd.p10);
  CHECK(rd.p00 > rd.p11);
  CHECK(rd.p00 + rd.p01 + rd.p10 + rd.p11 + rd.complement == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("retrodiction masses stay normalized across mu", "[qkd]") {
  for (double mu : {1e-4, 1e-3, 1e-2, 0.034, 0.1, 0.5, 1.0}) {
    auto r = gphot::retrodict(realistic_scenario(mu));
    CHECK(r.p00 + r.p01 + r.p10 + r.p11 + r.complement == Catch::Approx(1.0).margin(1e-10));
    for (double p : {r.p00, r.p01, r.p10, r.p11}) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("approximate povm tracks the exact one", "[qkd]") {
  auto cfg = realistic_scenario(0.034);
  auto exact = gphot::simulate(cfg);
  cfg.exact_povm = false;
  auto approx = gphot::simulate(cfg);
  CHECK(approx.time_qber == Catch::Approx(exact.time_qber).epsilon(0.05));
  CHECK(approx.key_rate == Catch::Approx(exact.key_rate).epsilon(0.05));
}

TEST_CASE("degenerate scenario reports zero coincidences", "[qkd]") {
  auto cfg = clean_scenario(1e-4);
  for (auto* u : {&cfg.alice, &cfg.bob}) u->insertion_db = 600.0;  // complete blockage
  CHECK_THROWS_AS(gphot::simulate(cfg), gphot::numeric_error);
}

TEST_CASE("spectral correction", "[qkd]") {
  ScenarioConfig cfg;
  CHECK(gphot::spectral_correction(cfg) == 1.0);  // flat channels
  cfg.spectral.tau_a = 0.5;
  cfg.spectral.tau_b = 0.4;
  cfg.spectral.tau_pair = 0.3;
  CHECK(gphot::spectral_correction(cfg) == Catch::Approx(1.5).epsilon(1e-12));
  // independent of mu
  auto c1 = cfg;
  c1.mu = 1e-3;
  auto c2 = cfg;
  c2.mu = 0.5;
  CHECK(gphot::spectral_correction(c1) == gphot::spectral_correction(c2));
}
