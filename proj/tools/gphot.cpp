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

// gphot: photon statistics of multimode Gaussian states and QKD scenarios.
//
//   gphot pnd|cdf|moments|factorial|qkd|selftest --config <file> [--out <dir>]
//         [--threads N] [--exact-povm|--approx-povm]
//
// Every command reads one config file, writes <command>.csv and
// <command>.manifest.json into the output directory, and prints a short
// summary. Outputs are byte-deterministic for a fixed config and version.
// Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gphot/fock_oracle.hpp"
#include "gphot/io.hpp"
#include "gphot/version.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int thread_count(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("GPHOT_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Deterministic parallel map: results land in index order no matter which
/// thread finishes first.
template <typename F>
std::vector<std::vector<std::string>> parallel_rows(std::size_t n, int threads, F&& fn) {
  std::vector<std::vector<std::string>> rows(n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) rows[i] = fn(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) rows[i] = fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

json section_to_json(const gphot::ConfigSection& sec) {
  json j = json::object();
  for (const auto& [k, v] : sec.values) {
    switch (v.kind) {
      case gphot::ConfigValue::number: j[k] = v.num; break;
      case gphot::ConfigValue::text: j[k] = v.str; break;
      case gphot::ConfigValue::boolean: j[k] = v.flag; break;
      case gphot::ConfigValue::array: j[k] = v.items; break;
    }
  }
  for (const auto& [name, child] : sec.children) j[name] = section_to_json(*child);
  return j;
}

struct RunContext {
  std::string command;
  std::string config_path;
  gphot::ConfigSection config;
  std::filesystem::path out_dir;
  int threads = 1;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

/// Write <name>.csv plus <name>.manifest.json. The manifest core (command,
/// config, resolved parameters, engine version) is hashed and the checksum
/// embedded in both files; wall time and output checksums are added to the
/// manifest afterwards so the table itself stays deterministic.
void write_outputs(const RunContext& ctx, const gphot::CsvTable& table) {
  std::filesystem::create_directories(ctx.out_dir);
  json core = {{"command", ctx.command},
               {"config", ctx.config_path},
               {"engine_version", gphot::version},
               {"resolved_parameters", section_to_json(ctx.config)}};
  const std::string core_text = core.dump(2);
  const std::string manifest_checksum = gphot::hex64(gphot::fnv1a64(core_text));

  const std::string csv_text =
      table.render(ctx.command, ctx.config_path, gphot::version, manifest_checksum);
  const auto csv_path = ctx.out_dir / (ctx.command + ".csv");
  std::ofstream csv(csv_path, std::ios::binary);
  csv << csv_text;
  csv.close();

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  json manifest = core;
  manifest["manifest_checksum"] = manifest_checksum;
  manifest["wall_time_s"] = wall;
  manifest["threads"] = ctx.threads;
  manifest["outputs"] = json::array({{{"file", csv_path.filename().string()},
                                      {"bytes", csv_text.size()},
                                      {"fnv1a64", gphot::hex64(gphot::fnv1a64(csv_text))}}});
  manifest["clamped_negative_probabilities"] = gphot::clamped_negative_count();
  std::ofstream mf(ctx.out_dir / (ctx.command + ".manifest.json"), std::ios::binary);
  mf << manifest.dump(2) << "\n";

  std::cout << ctx.command << ": wrote " << csv_path.string() << " (" << table.rows.size()
            << " rows)\n";
  if (gphot::clamped_negative_count() > 0)
    std::clog << "note: " << gphot::clamped_negative_count()
              << " tiny negative probabilities clamped to zero\n";
}

std::vector<std::vector<int>> enumerate_grid(const std::vector<int>& maxima) {
  std::vector<std::vector<int>> points;
  std::vector<int> idx(maxima.size(), 0);
  while (true) {
    points.push_back(idx);
    int d = static_cast<int>(maxima.size()) - 1;
    for (; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] <= maxima[static_cast<std::size_t>(d)]) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d < 0) break;
  }
  return points;
}

// ---------------------------------------------------------------------------
// statistics table commands

void run_pnd_like(RunContext& ctx, bool cumulative_table) {
  const auto& root = ctx.config;

  // multi-squeezer comparison table: one column per squeezer count plus the
  // Poisson reference
  const gphot::ConfigSection* state_sec = root.child("state");
  if (!cumulative_table && state_sec &&
      gphot::cfg::text_or(*state_sec, "kind", "") == "spdc" &&
      state_sec->values.count("squeezers") &&
      state_sec->values.at("squeezers").kind == gphot::ConfigValue::array) {
    const gphot::ConfigSection* grid = root.child("grid");
    if (!grid) throw gphot::config_error("missing [grid] section", root.file, 1);
    auto maxima = gphot::cfg::int_array(*grid, "max");
    if (maxima.size() != 1)
      throw gphot::config_error("spdc comparison table needs a single grid maximum",
                                grid->file, grid->line);
    const double mu = gphot::cfg::number(*state_sec, "mu");
    auto squeezers = gphot::cfg::int_array(*state_sec, "squeezers");

    gphot::CsvTable table;
    table.header = {"n"};
    for (int m : squeezers) table.header.push_back("p_m" + std::to_string(m));
    table.header.push_back("p_poisson");

    std::vector<gphot::GaussianState> states;
    for (int m : squeezers) {
      auto st = gphot::tmsv(std::asinh(std::sqrt(mu / m)));
      st.copies = m;
      states.push_back(st);
    }
    gphot::DetectorPartition pairs{{gphot::Detector{{0}, {1.0}, 0.0}}};
    table.rows = parallel_rows(static_cast<std::size_t>(maxima[0]) + 1, ctx.threads,
                               [&](std::size_t i) {
                                 int n = static_cast<int>(i);
                                 std::vector<std::string> row{std::to_string(n)};
                                 for (const auto& st : states)
                                   row.push_back(gphot::format_value(
                                       gphot::pnd(st, pairs, {n})));
                                 row.push_back(gphot::format_value(
                                     gphot::oracle::poisson_pnd(mu, n)));
                                 return row;
                               });
    write_outputs(ctx, table);
    return;
  }

  gphot::StatisticsProblem problem = gphot::load_statistics_problem(root);
  const gphot::ConfigSection* grid = root.child("grid");
  if (!grid) throw gphot::config_error("missing [grid] section", root.file, 1);
  gphot::cfg::check_keys(*grid, {"max"}, "[grid]");
  auto maxima = gphot::cfg::int_array(*grid, "max");
  if (maxima.size() != problem.partition.detectors.size())
    throw gphot::config_error("[grid] max needs one entry per detector", grid->file,
                              grid->line);

  gphot::CsvTable table;
  for (const auto& name : problem.detector_names) table.header.push_back("n_" + name);
  table.header.push_back(cumulative_table ? "p_cumulative" : "p");

  auto points = enumerate_grid(maxima);
  table.rows = parallel_rows(points.size(), ctx.threads, [&](std::size_t i) {
    std::vector<std::string> row;
    for (int n : points[i]) row.push_back(std::to_string(n));
    double value;
    if (problem.modified)
      value = cumulative_table
                  ? gphot::modified_cumulative(problem.modified_state, problem.partition,
                                               points[i])
                  : gphot::modified_pnd(problem.modified_state, problem.partition, points[i]);
    else
      value = cumulative_table ? gphot::cumulative(problem.state, problem.partition, points[i])
                               : gphot::pnd(problem.state, problem.partition, points[i]);
    row.push_back(gphot::format_value(value));
    return row;
  });
  write_outputs(ctx, table);
}

void run_moments(RunContext& ctx) {
  const auto& root = ctx.config;
  gphot::StatisticsProblem problem = gphot::load_statistics_problem(root);
  const gphot::ConfigSection* mom = root.child("moments");
  if (!mom) throw gphot::config_error("missing [moments] section", root.file, 1);
  gphot::cfg::check_keys(*mom, {"orders", "center"}, "[moments]");
  auto orders = gphot::cfg::int_array(*mom, "orders");
  const std::string center = gphot::cfg::text_or(*mom, "center", "raw");
  if (orders.size() != problem.partition.detectors.size())
    throw gphot::config_error("[moments] orders needs one entry per detector", mom->file,
                              mom->line);
  if (center != "raw" && center != "central")
    throw gphot::config_error("center must be 'raw' or 'central'", mom->file, mom->line);

  std::vector<double> centers(orders.size(), 0.0);
  if (center == "central") {
    for (std::size_t d = 0; d < orders.size(); ++d) {
      std::vector<int> unit(orders.size(), 0);
      unit[d] = 1;
      centers[d] = problem.modified
                       ? gphot::modified_moments(problem.modified_state, problem.partition,
                                                 unit, std::vector<double>(orders.size(), 0.0))
                       : gphot::moments(problem.state, problem.partition, unit,
                                        std::vector<double>(orders.size(), 0.0));
    }
  }

  gphot::CsvTable table;
  for (const auto& name : problem.detector_names) table.header.push_back("k_" + name);
  table.header.push_back(center == "central" ? "central_moment" : "raw_moment");

  auto points = enumerate_grid(orders);
  table.rows = parallel_rows(points.size(), ctx.threads, [&](std::size_t i) {
    std::vector<std::string> row;
    for (int k : points[i]) row.push_back(std::to_string(k));
    double value = problem.modified
                       ? gphot::modified_moments(problem.modified_state, problem.partition,
                                                 points[i], centers)
                       : gphot::moments(problem.state, problem.partition, points[i], centers);
    row.push_back(gphot::format_value(value));
    return row;
  });
  write_outputs(ctx, table);
}

void run_factorial(RunContext& ctx) {
  const auto& root = ctx.config;
  gphot::StatisticsProblem problem = gphot::load_statistics_problem(root);
  const gphot::ConfigSection* fac = root.child("factorial");
  if (!fac) throw gphot::config_error("missing [factorial] section", root.file, 1);
  gphot::cfg::check_keys(*fac, {"orders", "kind"}, "[factorial]");
  auto orders = gphot::cfg::int_array(*fac, "orders");
  const std::string kind = gphot::cfg::text_or(*fac, "kind", "falling");
  if (orders.size() != problem.partition.detectors.size())
    throw gphot::config_error("[factorial] orders needs one entry per detector", fac->file,
                              fac->line);
  if (kind != "falling" && kind != "rising")
    throw gphot::config_error("kind must be 'falling' or 'rising'", fac->file, fac->line);
  const bool falling = kind == "falling";

  gphot::CsvTable table;
  for (const auto& name : problem.detector_names) table.header.push_back("k_" + name);
  table.header.push_back(falling ? "falling_factorial" : "rising_factorial");

  auto points = enumerate_grid(orders);
  table.rows = parallel_rows(points.size(), ctx.threads, [&](std::size_t i) {
    std::vector<std::string> row;
    for (int k : points[i]) row.push_back(std::to_string(k));
    double value;
    if (problem.modified)
      value = falling ? gphot::modified_falling_factorial(problem.modified_state,
                                                          problem.partition, points[i])
                      : gphot::modified_rising_factorial(problem.modified_state,
                                                         problem.partition, points[i]);
    else
      value = falling ? gphot::falling_factorial(problem.state, problem.partition, points[i])
                      : gphot::rising_factorial(problem.state, problem.partition, points[i]);
    row.push_back(gphot::format_value(value));
    return row;
  });
  write_outputs(ctx, table);
}

// ---------------------------------------------------------------------------
// qkd command

struct SweepSpec {
  std::string kind = "none";  // none | mu | distance
  double min = 0.0, max = 0.0;
  int points = 1;
};

SweepSpec load_sweep(const gphot::ConfigSection& root) {
  SweepSpec sw;
  const gphot::ConfigSection* s = root.child("sweep");
  if (!s) return sw;
  gphot::cfg::check_keys(*s, {"kind", "min", "max", "points"}, "[sweep]");
  sw.kind = gphot::cfg::text(*s, "kind");
  if (sw.kind != "mu" && sw.kind != "distance")
    throw gphot::config_error("sweep kind must be 'mu' or 'distance'", s->file, s->line);
  sw.min = gphot::cfg::number(*s, "min");
  sw.max = gphot::cfg::number(*s, "max");
  sw.points = static_cast<int>(gphot::cfg::integer(*s, "points"));
  if (sw.points < 2) throw gphot::config_error("sweep needs points >= 2", s->file, s->line);
  if (sw.min <= 0.0 && sw.kind == "mu")
    throw gphot::config_error("mu sweep needs min > 0", s->file, s->line);
  if (sw.max <= sw.min) throw gphot::config_error("sweep needs max > min", s->file, s->line);
  return sw;
}

gphot::ScenarioConfig scenario_at(const gphot::ScenarioConfig& base, const SweepSpec& sw,
                                  int index) {
  gphot::ScenarioConfig cfg = base;
  if (sw.kind == "mu") {
    double t = static_cast<double>(index) / (sw.points - 1);
    cfg.mu = sw.min * std::pow(sw.max / sw.min, t);  // log grid
  } else if (sw.kind == "distance") {
    double d = sw.min + (sw.max - sw.min) * index / (sw.points - 1);
    double base_total = base.alice.fiber_km + base.bob.fiber_km;
    if (base_total > 0.0) {  // scale both links proportionally
      cfg.alice.fiber_km = base.alice.fiber_km * d / base_total;
      cfg.bob.fiber_km = base.bob.fiber_km * d / base_total;
    } else {
      cfg.alice.fiber_km = d / 2.0;
      cfg.bob.fiber_km = d / 2.0;
    }
  }
  return cfg;
}

void run_qkd(RunContext& ctx, const std::string& mode, int povm_override) {
  gphot::ScenarioConfig base = gphot::load_scenario(ctx.config);
  if (povm_override >= 0) base.exact_povm = povm_override == 1;
  SweepSpec sweep = load_sweep(ctx.config);
  const int n = sweep.kind == "none" ? 1 : sweep.points;

  gphot::CsvTable table;
  if (mode == "simulate") {
    table.header = {"mu",           "fiber_a_km",   "fiber_b_km",  "key_rate_bits_s",
                    "time_qber",    "time_correct", "time_error",  "phase_correct",
                    "phase_error",  "r_squeeze_s",  "r_squeeze_l"};
    table.rows = parallel_rows(static_cast<std::size_t>(n), ctx.threads, [&](std::size_t i) {
      auto cfg = scenario_at(base, sweep, static_cast<int>(i));
      auto m = gphot::simulate(cfg);
      return std::vector<std::string>{
          gphot::format_value(cfg.mu),
          gphot::format_value(cfg.alice.fiber_km),
          gphot::format_value(cfg.bob.fiber_km),
          gphot::format_value(m.key_rate),
          gphot::format_value(m.time_qber),
          gphot::format_value(m.coincidences.time_correct),
          gphot::format_value(m.coincidences.time_error),
          gphot::format_value(m.coincidences.phase_correct),
          gphot::format_value(m.coincidences.phase_error),
          gphot::format_value(m.squeezing.r_s),
          gphot::format_value(m.squeezing.r_l)};
    });
  } else {  // retrodict
    table.header = {"mu", "p00", "p01", "p10", "p11", "complement"};
    table.rows = parallel_rows(static_cast<std::size_t>(n), ctx.threads, [&](std::size_t i) {
      auto cfg = scenario_at(base, sweep, static_cast<int>(i));
      auto r = gphot::retrodict(cfg);
      return std::vector<std::string>{
          gphot::format_value(r.mu),        gphot::format_value(r.p00),
          gphot::format_value(r.p01),       gphot::format_value(r.p10),
          gphot::format_value(r.p11),       gphot::format_value(r.complement)};
    });
  }
  ctx.command = "qkd_" + mode;
  write_outputs(ctx, table);
}

// ---------------------------------------------------------------------------
// selftest

int run_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok, double err) {
    std::printf("%-44s %s (max err %.3e)\n", name, ok ? "pass" : "FAIL", err);
    if (!ok) ++failures;
  };

  {  // displaced squeezed state against the closed-form distribution
    const gphot::cdouble alpha = std::sqrt(1.2) * std::exp(gphot::cdouble(0.0, 50.0 * M_PI / 180.0));
    const double r = std::asinh(std::sqrt(2.8)), theta = 30.0 * M_PI / 180.0;
    auto st = gphot::displaced_squeezed_thermal(alpha, r, theta, 0.0);
    gphot::DetectorPartition part{{gphot::Detector{{0}, {1.0}, 0.0}}};
    double worst = 0.0;
    for (int n = 0; n <= 8; ++n) {
      double expect = gphot::oracle::analytic_displaced_squeezed_pnd(alpha, r, theta, n);
      double got = gphot::pnd(st, part, {n});
      worst = std::max(worst, std::abs(got - expect) / expect);
    }
    report("displaced squeezed PND vs closed form", worst <= 1e-12, worst);
  }

  {  // thermal state through loss against the Fock-space oracle
    auto mixture = gphot::oracle::oracle_loss(gphot::oracle::oracle_thermal(1.0, 60), 0, 0.5);
    auto table = gphot::oracle::oracle_pnd(mixture, {{0}}, {{1.0}}, {0.0}, {8});
    auto lossy = gphot::loss_channel(gphot::thermal(1.0), 0, 0.5);
    gphot::DetectorPartition part{{gphot::Detector{{0}, {1.0}, 0.0}}};
    double worst = 0.0;
    for (int n = 0; n <= 6; ++n)
      worst = std::max(worst, std::abs(gphot::pnd(lossy, part, {n}) -
                                       table.p[static_cast<std::size_t>(n)]));
    report("thermal loss vs Fock oracle", worst <= 1e-10 + table.mass_defect, worst);
  }

  {  // POVM completeness on a noisy two-mode state
    auto st = gphot::tensor(gphot::tmsv(0.4), gphot::thermal(0.3));
    st = gphot::apply(gphot::beamsplitter(3, 0, 2, 0.6), st);
    gphot::TimeBinnedDetector det;
    det.bin_modes = {{{0}, {1}, {2}}};
    det.efficiency = 0.45;
    det.nu_bins = {0.05, 0.02, 0.07};
    det.p_on = 0.9;
    double total = gphot::bin_click_probability(st, det, gphot::Bin::early) +
                   gphot::bin_click_probability(st, det, gphot::Bin::central) +
                   gphot::bin_click_probability(st, det, gphot::Bin::late) +
                   gphot::no_click_probability(st, det, true);
    report("POVM completeness", std::abs(total - 1.0) <= 1e-12, std::abs(total - 1.0));
  }

  std::printf("selftest: %s\n", failures == 0 ? "all checks passed" : "FAILURES");
  return failures == 0 ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photon statistics of multimode Gaussian states"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int threads_flag = 0;
  bool exact_povm = false, approx_povm = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    if (needs_config)
      cmd->add_option("--config", config_path, "configuration file")->required();
    cmd->add_option("--out", out_dir, "output directory (default: current)");
    cmd->add_option("--threads", threads_flag,
                    "worker threads (default: GPHOT_THREADS or hardware)");
  };

  CLI::App* c_pnd = app.add_subcommand("pnd", "photon number distribution table");
  CLI::App* c_cdf = app.add_subcommand("cdf", "cumulative probability table");
  CLI::App* c_mom = app.add_subcommand("moments", "raw or central moment table");
  CLI::App* c_fac = app.add_subcommand("factorial", "factorial moment table");
  CLI::App* c_qkd = app.add_subcommand("qkd", "QKD scenario simulation");
  CLI::App* c_self = app.add_subcommand("selftest", "run bundled oracle checks");
  for (CLI::App* c : {c_pnd, c_cdf, c_mom, c_fac}) add_common(c);
  add_common(c_qkd);
  c_qkd->add_flag("--exact-povm", exact_povm, "use the exact no-click operator (default)");
  c_qkd->add_flag("--approx-povm", approx_povm, "use the 4-term no-click approximation");
  std::string qkd_mode = "simulate";
  c_qkd->add_option("mode", qkd_mode, "simulate | retrodict")
      ->check(CLI::IsMember({"simulate", "retrodict"}));
  (void)c_self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (c_self->parsed()) return run_selftest();

  RunContext ctx;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open config file '" << config_path << "'\n";
      return kExitConfig;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    ctx.config = gphot::parse_config(buffer.str(), config_path);
    ctx.config_path = config_path;
    ctx.out_dir = out_dir;
    ctx.threads = thread_count(threads_flag);

    const long long schema = gphot::cfg::integer(ctx.config, "schema_version");
    if (schema != 1)
      throw gphot::config_error("unsupported schema_version " + std::to_string(schema),
                                config_path, 1);
  } catch (const gphot::error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (c_pnd->parsed()) {
      ctx.command = "pnd";
      run_pnd_like(ctx, false);
    } else if (c_cdf->parsed()) {
      ctx.command = "cdf";
      run_pnd_like(ctx, true);
    } else if (c_mom->parsed()) {
      ctx.command = "moments";
      run_moments(ctx);
    } else if (c_fac->parsed()) {
      ctx.command = "factorial";
      run_factorial(ctx);
    } else if (c_qkd->parsed()) {
      if (exact_povm && approx_povm) {
        std::cerr << "error: --exact-povm and --approx-povm are mutually exclusive\n";
        return kExitConfig;
      }
      int povm_override = exact_povm ? 1 : (approx_povm ? 0 : -1);
      run_qkd(ctx, qkd_mode, povm_override);
    }
  } catch (const gphot::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gphot::error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
