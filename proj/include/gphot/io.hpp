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

// Configuration file format and table output helpers for the CLI. The
// format is a strict line-based key/value syntax with nested [section]
// headers and numeric arrays; every key is validated against the schema of
// the command that consumes it, and diagnostics carry file and line.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gphot/common.hpp"
#include "gphot/gaussian.hpp"
#include "gphot/nongaussian.hpp"
#include "gphot/qkd.hpp"
#include "gphot/statistics.hpp"

namespace gphot {

/// Configuration syntax or schema violation; carries file:line context.
class config_error : public error {
 public:
  config_error(const std::string& what, const std::string& file, int line)
      : error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit config_error(const std::string& what) : error(what), line_(0) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ConfigValue {
  enum Kind { number, text, boolean, array } kind = number;
  double num = 0.0;
  std::string str;
  bool flag = false;
  std::vector<double> items;
  int line = 0;
};

struct ConfigSection {
  std::string file;
  int line = 0;
  std::map<std::string, ConfigValue> values;
  std::vector<std::pair<std::string, std::unique_ptr<ConfigSection>>> children;

  const ConfigSection* child(const std::string& name) const {
    for (const auto& [n, c] : children)
      if (n == name) return c.get();
    return nullptr;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline ConfigValue parse_value(const std::string& raw, const std::string& file, int line) {
  ConfigValue v;
  v.line = line;
  std::string s = trim(raw);
  if (s.empty()) throw config_error("missing value", file, line);
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw config_error("unterminated string", file, line);
    v.kind = ConfigValue::text;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::boolean;
    v.flag = (s == "true");
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw config_error("unterminated array", file, line);
    v.kind = ConfigValue::array;
    std::string inner = s.substr(1, s.size() - 2);
    std::stringstream ss(inner);
    std::string part;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      if (part.empty()) throw config_error("empty array element", file, line);
      char* end = nullptr;
      double x = std::strtod(part.c_str(), &end);
      if (end != part.c_str() + part.size())
        throw config_error("array element '" + part + "' is not a number", file, line);
      v.items.push_back(x);
    }
    return v;
  }
  char* end = nullptr;
  double x = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw config_error("value '" + s + "' is not a number, string, bool, or array", file,
                       line);
  v.kind = ConfigValue::number;
  v.num = x;
  return v;
}

// strip a trailing comment that is not inside a quoted string
inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace detail

inline ConfigSection parse_config(const std::string& text, const std::string& file) {
  ConfigSection root;
  root.file = file;
  ConfigSection* current = &root;
  std::stringstream ss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw config_error("unterminated section header", file, lineno);
      std::string path = detail::trim(line.substr(1, line.size() - 2));
      if (path.empty()) throw config_error("empty section name", file, lineno);
      current = &root;
      std::stringstream ps(path);
      std::string part;
      while (std::getline(ps, part, '.')) {
        part = detail::trim(part);
        if (part.empty()) throw config_error("empty section path component", file, lineno);
        ConfigSection* next = nullptr;
        for (auto& [n, c] : current->children)
          if (n == part) next = c.get();
        if (!next) {
          auto sec = std::make_unique<ConfigSection>();
          sec->file = file;
          sec->line = lineno;
          next = sec.get();
          current->children.emplace_back(part, std::move(sec));
        }
        current = next;
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("expected 'key = value' or '[section]'", file, lineno);
    std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw config_error("empty key", file, lineno);
    for (char c : key)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        throw config_error("invalid character in key '" + key + "'", file, lineno);
    if (current->values.count(key))
      throw config_error("duplicate key '" + key + "'", file, lineno);
    current->values[key] = detail::parse_value(line.substr(eq + 1), file, lineno);
  }
  return root;
}

// ---------------------------------------------------------------------------
// typed, validating accessors

namespace cfg {

inline const ConfigValue& require(const ConfigSection& s, const std::string& key) {
  auto it = s.values.find(key);
  if (it == s.values.end())
    throw config_error("missing required key '" + key + "'", s.file, s.line);
  return it->second;
}

inline double number(const ConfigSection& s, const std::string& key) {
  const auto& v = require(s, key);
  if (v.kind != ConfigValue::number)
    throw config_error("key '" + key + "' must be a number", s.file, v.line);
  return v.num;
}

inline double number_or(const ConfigSection& s, const std::string& key, double fallback) {
  return s.values.count(key) ? number(s, key) : fallback;
}

inline long long integer(const ConfigSection& s, const std::string& key) {
  double x = number(s, key);
  if (x != std::nearbyint(x))
    throw config_error("key '" + key + "' must be an integer", s.file,
                       require(s, key).line);
  return static_cast<long long>(x);
}

inline long long integer_or(const ConfigSection& s, const std::string& key, long long fb) {
  return s.values.count(key) ? integer(s, key) : fb;
}

inline std::string text(const ConfigSection& s, const std::string& key) {
  const auto& v = require(s, key);
  if (v.kind != ConfigValue::text)
    throw config_error("key '" + key + "' must be a quoted string", s.file, v.line);
  return v.str;
}

inline std::string text_or(const ConfigSection& s, const std::string& key,
                           const std::string& fb) {
  return s.values.count(key) ? text(s, key) : fb;
}

inline bool boolean_or(const ConfigSection& s, const std::string& key, bool fb) {
  if (!s.values.count(key)) return fb;
  const auto& v = require(s, key);
  if (v.kind != ConfigValue::boolean)
    throw config_error("key '" + key + "' must be true or false", s.file, v.line);
  return v.flag;
}

inline std::vector<double> array(const ConfigSection& s, const std::string& key) {
  const auto& v = require(s, key);
  if (v.kind == ConfigValue::number) return {v.num};  // scalar broadcast
  if (v.kind != ConfigValue::array)
    throw config_error("key '" + key + "' must be an array", s.file, v.line);
  return v.items;
}

inline std::vector<int> int_array(const ConfigSection& s, const std::string& key) {
  std::vector<int> out;
  for (double x : array(s, key)) {
    if (x != std::nearbyint(x))
      throw config_error("key '" + key + "' must hold integers", s.file,
                         require(s, key).line);
    out.push_back(static_cast<int>(x));
  }
  return out;
}

/// Reject keys outside the schema of the consuming command.
inline void check_keys(const ConfigSection& s, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [k, v] : s.values)
    if (!allowed.count(k))
      throw config_error("unknown key '" + k + "' in " + where, s.file, v.line);
}

inline void check_children(const ConfigSection& s, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (const auto& [n, c] : s.children)
    if (!allowed.count(n))
      throw config_error("unknown section '" + n + "' in " + where, c->file, c->line);
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// building engine inputs from a parsed configuration

struct StatisticsProblem {
  GaussianState state;
  DetectorPartition partition;
  std::vector<std::string> detector_names;
  bool modified = false;
  ModifiedState modified_state;  // valid when `modified`
  // grid/orders requests read separately per command
};

namespace detail {

inline GaussianState state_from_config(const ConfigSection& sec) {
  cfg::check_keys(sec,
                  {"kind", "mu", "alpha_re", "alpha_im", "r", "theta", "squeezers", "copies",
                   "modes"},
                  "[state]");
  const std::string kind = cfg::text(sec, "kind");
  GaussianState st;
  if (kind == "vacuum") {
    st = vacuum(static_cast<int>(cfg::integer_or(sec, "modes", 1)));
  } else if (kind == "thermal") {
    st = thermal(cfg::number(sec, "mu"));
  } else if (kind == "coherent") {
    st = coherent(cdouble(cfg::number_or(sec, "alpha_re", 0.0),
                          cfg::number_or(sec, "alpha_im", 0.0)));
  } else if (kind == "squeezed") {
    st = squeezed(cfg::number(sec, "r"), cfg::number_or(sec, "theta", 0.0));
  } else if (kind == "displaced_squeezed_thermal") {
    st = displaced_squeezed_thermal(cdouble(cfg::number_or(sec, "alpha_re", 0.0),
                                            cfg::number_or(sec, "alpha_im", 0.0)),
                                    cfg::number_or(sec, "r", 0.0),
                                    cfg::number_or(sec, "theta", 0.0),
                                    cfg::number_or(sec, "mu", 0.0));
  } else if (kind == "tmsv") {
    st = tmsv(cfg::number(sec, "r"), cfg::number_or(sec, "theta", 0.0));
  } else if (kind == "spdc") {
    // M equally strong two-mode squeezers with a total mean pair number mu
    const int m = static_cast<int>(cfg::integer(sec, "squeezers"));
    if (m < 1) throw config_error("spdc needs squeezers >= 1", sec.file, sec.line);
    const double mu = cfg::number(sec, "mu");
    st = tmsv(std::asinh(std::sqrt(mu / m)));
    st.copies = m;
    if (sec.values.count("copies"))
      throw config_error("spdc sets copies from squeezers", sec.file, sec.line);
    return st;
  } else {
    throw config_error("unknown state kind '" + kind + "'", sec.file, sec.line);
  }
  st.copies = static_cast<int>(cfg::integer_or(sec, "copies", 1));
  if (st.copies < 1) throw config_error("copies must be >= 1", sec.file, sec.line);
  return st;
}

inline GaussianState apply_network(const ConfigSection& net, GaussianState st) {
  cfg::check_keys(net, {}, "[network]");
  for (const auto& [name, op] : net.children) {
    const std::string kind = cfg::text(*op, "op");
    if (kind == "loss") {
      cfg::check_keys(*op, {"op", "mode", "transmission"}, "[network." + name + "]");
      st = loss_channel(st, static_cast<int>(cfg::integer(*op, "mode")),
                        cfg::number(*op, "transmission"));
    } else if (kind == "beamsplitter") {
      cfg::check_keys(*op, {"op", "modes", "transmission"}, "[network." + name + "]");
      auto modes = cfg::int_array(*op, "modes");
      if (modes.size() != 2)
        throw config_error("beamsplitter needs modes = [i, j]", op->file, op->line);
      st = apply(beamsplitter(st.modes, modes[0], modes[1], cfg::number(*op, "transmission")),
                 st);
    } else if (kind == "phase") {
      cfg::check_keys(*op, {"op", "mode", "phi"}, "[network." + name + "]");
      st = apply(phase_shift(st.modes, static_cast<int>(cfg::integer(*op, "mode")),
                             cfg::number(*op, "phi")),
                 st);
    } else {
      throw config_error("unknown network op '" + kind + "'", op->file, op->line);
    }
  }
  return st;
}

}  // namespace detail

/// Shared front half of the statistics commands: state, optional network and
/// photon addition/subtraction, detector partition.
inline StatisticsProblem load_statistics_problem(const ConfigSection& root) {
  const ConfigSection* state_sec = root.child("state");
  if (!state_sec) throw config_error("missing [state] section", root.file, 1);
  GaussianState st = detail::state_from_config(*state_sec);
  if (const ConfigSection* net = root.child("network"))
    st = detail::apply_network(*net, st);

  StatisticsProblem p;
  p.state = st;

  const ConfigSection* dets = root.child("detector");
  if (!dets || dets->children.empty())
    throw config_error("at least one [detector.<name>] section required", root.file, 1);
  for (const auto& [name, d] : dets->children) {
    cfg::check_keys(*d, {"modes", "eta", "nu"}, "[detector." + name + "]");
    Detector det;
    det.modes = cfg::int_array(*d, "modes");
    auto eta = cfg::array(*d, "eta");
    if (eta.size() == 1) eta.assign(det.modes.size(), eta[0]);
    det.eta = eta;
    det.nu = cfg::number_or(*d, "nu", 0.0);
    p.partition.detectors.push_back(det);
    p.detector_names.push_back(name);
  }
  validate(p.partition, p.state.modes);

  if (const ConfigSection* mod = root.child("modify")) {
    cfg::check_keys(*mod, {"kind", "k"}, "[modify]");
    const std::string kind = cfg::text(*mod, "kind");
    PhotonOp op;
    if (kind == "subtracted")
      op = PhotonOp::subtracted;
    else if (kind == "added")
      op = PhotonOp::added;
    else
      throw config_error("modify kind must be 'added' or 'subtracted'", mod->file, mod->line);
    std::vector<int> k = cfg::int_array(*mod, "k");
    if (static_cast<int>(k.size()) != p.state.modes)
      throw config_error("modify k needs one entry per mode", mod->file, mod->line);
    p.modified = true;
    p.modified_state = normalize(p.state, op, k);
  }
  return p;
}

/// QKD scenario from the [qkd] tree.
inline ScenarioConfig load_scenario(const ConfigSection& root) {
  const ConfigSection* q = root.child("qkd");
  if (!q) throw config_error("missing [qkd] section", root.file, 1);
  cfg::check_keys(*q, {"mu", "schmidt_k", "f_rep", "exact_povm", "phase_pairing"}, "[qkd]");
  cfg::check_children(*q, {"pump", "alice", "bob", "spectral"}, "[qkd]");

  ScenarioConfig sc;
  sc.mu = cfg::number(*q, "mu");
  sc.schmidt_k = static_cast<int>(cfg::integer_or(*q, "schmidt_k", 1));
  sc.f_rep = cfg::number(*q, "f_rep");
  sc.exact_povm = cfg::boolean_or(*q, "exact_povm", true);
  sc.phase_pairing = static_cast<int>(cfg::integer_or(*q, "phase_pairing", 0));

  if (const ConfigSection* pump = q->child("pump")) {
    cfg::check_keys(*pump, {"t_p1", "t_p2", "loss_ps", "loss_pl", "phase"}, "[qkd.pump]");
    sc.pump.t_p1 = cfg::number_or(*pump, "t_p1", 0.5);
    sc.pump.t_p2 = cfg::number_or(*pump, "t_p2", 0.5);
    sc.pump.loss_ps = cfg::number_or(*pump, "loss_ps", 0.0);
    sc.pump.loss_pl = cfg::number_or(*pump, "loss_pl", 0.0);
    sc.pump.phase = cfg::number_or(*pump, "phase", 0.0);
  }

  auto load_user = [&](const char* name, QkdUserConfig& user) {
    const ConfigSection* u = q->child(name);
    if (!u)
      throw config_error(std::string("missing [qkd.") + name + "] section", q->file, q->line);
    cfg::check_keys(*u,
                    {"fiber_km", "fiber_db_per_km", "insertion_db", "t_split", "t_combine",
                     "visibility", "phase"},
                    std::string("[qkd.") + name + "]");
    cfg::check_children(*u, {"det0", "det1"}, std::string("[qkd.") + name + "]");
    user.fiber_km = cfg::number_or(*u, "fiber_km", 0.0);
    user.fiber_db_per_km = cfg::number_or(*u, "fiber_db_per_km", 0.2);
    user.insertion_db = cfg::number_or(*u, "insertion_db", 0.0);
    user.t_split = cfg::number_or(*u, "t_split", 0.5);
    user.t_combine = cfg::number_or(*u, "t_combine", 0.5);
    user.visibility = cfg::number_or(*u, "visibility", 1.0);
    user.phase = cfg::number_or(*u, "phase", 0.0);
    auto load_det = [&](const char* dn, DetectorSpec& spec) {
      const ConfigSection* d = u->child(dn);
      if (!d)
        throw config_error(std::string("missing [qkd.") + name + "." + dn + "]", u->file,
                           u->line);
      cfg::check_keys(*d,
                      {"efficiency", "dark_cps", "afterpulse", "dead_time_us", "bin_width_ns"},
                      std::string("[qkd.") + name + "." + dn + "]");
      spec.efficiency = cfg::number(*d, "efficiency");
      spec.dark_rate = cfg::number_or(*d, "dark_cps", 0.0);
      spec.afterpulse_prob = cfg::number_or(*d, "afterpulse", 0.0);
      spec.dead_time = cfg::number_or(*d, "dead_time_us", 0.0) * 1e-6;
      spec.bin_width = cfg::number_or(*d, "bin_width_ns", 1.0) * 1e-9;
    };
    load_det("det0", user.det0);
    load_det("det1", user.det1);
  };
  load_user("alice", sc.alice);
  load_user("bob", sc.bob);

  if (const ConfigSection* sp = q->child("spectral")) {
    cfg::check_keys(*sp, {"tau_a", "tau_b", "tau_pair"}, "[qkd.spectral]");
    sc.spectral.tau_a = cfg::number_or(*sp, "tau_a", 1.0);
    sc.spectral.tau_b = cfg::number_or(*sp, "tau_b", 1.0);
    sc.spectral.tau_pair = cfg::number_or(*sp, "tau_pair", 1.0);
  }
  validate(sc);
  return sc;
}

// ---------------------------------------------------------------------------
// deterministic table output

/// 64-bit FNV-1a over a byte string; used for output checksums.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

/// Full-precision decimal formatting (17 significant digits, '.' decimal).
inline std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Comma-separated table with '#'-prefixed metadata lines. The metadata
/// carries the manifest core checksum so a table can be matched to its run.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string data_text() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i)
      out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
      out += "\n";
    }
    return out;
  }

  std::string render(const std::string& command, const std::string& config_path,
                     const std::string& engine_version,
                     const std::string& manifest_checksum) const {
    std::string data = data_text();
    std::string out;
    out += "# generator = gphot " + engine_version + "\n";
    out += "# command = " + command + "\n";
    out += "# config = " + config_path + "\n";
    out += "# manifest_checksum = " + manifest_checksum + "\n";
    out += "# data_checksum = " + hex64(fnv1a64(data)) + "\n";
    out += data;
    return out;
  }
};

}  // namespace gphot
