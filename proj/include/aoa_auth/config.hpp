#pragma once

// Scenario configuration: a flat JSON object whose keys mirror the
// Scenario fields below. Missing keys take the defaults (the reference
// simulation setup); unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoa_auth/attacks.hpp"
#include "aoa_auth/occ.hpp"
#include "aoa_auth/signal_model.hpp"

namespace aoa_auth {

struct Scenario {
  ArrayConfig array;
  int num_probes = 17;
  double probe_min_deg = -90.0;
  double probe_max_deg = 90.0;
  NodeGeometry alice{10.0, 0.0};
  std::vector<double> eve_distances_m{1,   5,   10,  25,  50,  100,  150,
                                      200, 250, 400, 500, 750, 1000, 2000};
  std::vector<double> eve_aoas_deg{5, 20, 30, 45, 60};
  std::vector<AttackKind> attacks{AttackKind::LocationBased, AttackKind::CodeBased};
  int trials = 1000;
  int train_size = 1000;
  int test_size = 20000;
  int repetitions = 10;
  std::uint64_t master_seed = 1;
  OcsvmParams ocsvm;
  double grid_step_deg = 0.05;
  double cost_curve_eve_distance_m = 10.0;
  double cost_curve_eve_aoa_deg = 45.0;
  bool cost_curve_noiseless = false;

  ProbeSchedule schedule() const {
    return ProbeSchedule::uniform(num_probes, array.num_antennas, probe_min_deg,
                                  probe_max_deg);
  }

  /// OC-SVM parameters with the median-heuristic floor tied to the grid.
  OcsvmParams effective_ocsvm() const {
    OcsvmParams p = ocsvm;
    p.median_floor_deg2 = grid_step_deg * grid_step_deg;
    return p;
  }

  void validate() const {
    array.validate();
    if (num_probes <= 1)
      throw ConfigError("num_probes (T): must be > 1, got " + std::to_string(num_probes));
    if (!(probe_min_deg >= -90.0 && probe_max_deg <= 90.0 && probe_min_deg < probe_max_deg))
      throw ConfigError("probe_min_deg/probe_max_deg: need -90 <= min < max <= 90");
    if (!(alice.distance_m > 0.0))
      throw ConfigError("alice_distance_m: must be > 0");
    if (!(alice.aoa_deg > -90.0 && alice.aoa_deg < 90.0))
      throw ConfigError("alice_aoa_deg: must be in (-90, 90)");
    if (eve_distances_m.empty()) throw ConfigError("eve_distances_m: must be non-empty");
    for (double d : eve_distances_m)
      if (!(d > 0.0)) throw ConfigError("eve_distances_m: entries must be > 0");
    if (eve_aoas_deg.empty()) throw ConfigError("eve_aoas_deg: must be non-empty");
    for (double a : eve_aoas_deg)
      if (!(a > -90.0 && a < 90.0))
        throw ConfigError("eve_aoas_deg: entries must be in (-90, 90)");
    if (attacks.empty()) throw ConfigError("attacks: must be non-empty");
    if (trials < 1) throw ConfigError("trials: must be >= 1");
    if (train_size < 2) throw ConfigError("train_size: must be >= 2");
    if (test_size < 2 || test_size % 2 != 0)
      throw ConfigError("test_size: must be a positive even number (balanced Alice/Eve)");
    if (repetitions < 1) throw ConfigError("repetitions: must be >= 1");
    ocsvm.validate();
    if (!(grid_step_deg > 0.0 && grid_step_deg <= 10.0))
      throw ConfigError("grid_step_deg: must be in (0, 10]");
    if (!(cost_curve_eve_distance_m > 0.0))
      throw ConfigError("cost_curve_eve_distance_m: must be > 0");
    if (!(cost_curve_eve_aoa_deg > -90.0 && cost_curve_eve_aoa_deg < 90.0))
      throw ConfigError("cost_curve_eve_aoa_deg: must be in (-90, 90)");
  }
};

namespace detail {

using json = nlohmann::json;

template <typename T>
T get_field(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key + ": wrong type (got " + std::string(j.type_name()) + ")");
  }
}

inline double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) {
    // -inf is not representable in JSON; accept it as a string.
    if (j.is_string() && (j.get<std::string>() == "-inf" || j.get<std::string>() == "-infinity"))
      return -std::numeric_limits<double>::infinity();
    throw ConfigError(key + ": expected a number, got " + std::string(j.type_name()));
  }
  return j.get<double>();
}

inline int get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer())
    throw ConfigError(key + ": expected an integer, got " + std::string(j.type_name()));
  const auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(key + ": integer out of range");
  return static_cast<int>(v);
}

inline std::vector<double> get_number_list(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(get_number(e, key));
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json j;
  j["num_antennas"] = s.array.num_antennas;
  j["carrier_freq_hz"] = s.array.carrier_freq_hz;
  j["bandwidth_hz"] = s.array.bandwidth_hz;
  j["noise_psd_dbm_hz"] = s.array.noise_psd_dbm_hz;
  if (std::isinf(s.array.tx_power_dbm))
    j["tx_power_dbm"] = "-inf";
  else
    j["tx_power_dbm"] = s.array.tx_power_dbm;
  j["num_probes"] = s.num_probes;
  j["probe_min_deg"] = s.probe_min_deg;
  j["probe_max_deg"] = s.probe_max_deg;
  j["alice_distance_m"] = s.alice.distance_m;
  j["alice_aoa_deg"] = s.alice.aoa_deg;
  j["eve_distances_m"] = s.eve_distances_m;
  j["eve_aoas_deg"] = s.eve_aoas_deg;
  auto attacks = nlohmann::json::array();
  for (auto k : s.attacks) attacks.push_back(std::string(to_string(k)));
  j["attacks"] = attacks;
  j["trials"] = s.trials;
  j["train_size"] = s.train_size;
  j["test_size"] = s.test_size;
  j["repetitions"] = s.repetitions;
  j["master_seed"] = s.master_seed;
  j["ocsvm_nu"] = s.ocsvm.nu;
  if (s.ocsvm.gamma)
    j["ocsvm_gamma"] = *s.ocsvm.gamma;
  else
    j["ocsvm_gamma"] = "median-heuristic";
  j["ocsvm_tol"] = s.ocsvm.solver_tol;
  j["ocsvm_max_iters"] = s.ocsvm.max_iters;
  j["grid_step_deg"] = s.grid_step_deg;
  j["cost_curve_eve_distance_m"] = s.cost_curve_eve_distance_m;
  j["cost_curve_eve_aoa_deg"] = s.cost_curve_eve_aoa_deg;
  j["cost_curve_noiseless"] = s.cost_curve_noiseless;
  return j;
}

/// Overlays the keys present in `j` onto the defaults and validates.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::get_int;
  using detail::get_number;
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  Scenario s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "num_antennas") s.array.num_antennas = get_int(v, k);
    else if (k == "carrier_freq_hz") s.array.carrier_freq_hz = get_number(v, k);
    else if (k == "bandwidth_hz") s.array.bandwidth_hz = get_number(v, k);
    else if (k == "noise_psd_dbm_hz") s.array.noise_psd_dbm_hz = get_number(v, k);
    else if (k == "tx_power_dbm") s.array.tx_power_dbm = get_number(v, k);
    else if (k == "num_probes") s.num_probes = get_int(v, k);
    else if (k == "probe_min_deg") s.probe_min_deg = get_number(v, k);
    else if (k == "probe_max_deg") s.probe_max_deg = get_number(v, k);
    else if (k == "alice_distance_m") s.alice.distance_m = get_number(v, k);
    else if (k == "alice_aoa_deg") s.alice.aoa_deg = get_number(v, k);
    else if (k == "eve_distances_m") s.eve_distances_m = detail::get_number_list(v, k);
    else if (k == "eve_aoas_deg") s.eve_aoas_deg = detail::get_number_list(v, k);
    else if (k == "attacks") {
      if (!v.is_array()) throw ConfigError("attacks: expected an array of strings");
      s.attacks.clear();
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError("attacks: entries must be strings");
        auto kind = parse_attack_kind(e.get<std::string>());
        if (!kind)
          throw ConfigError("attacks: unknown attack '" + e.get<std::string>() +
                            "' (expected none, random, code, location)");
        s.attacks.push_back(*kind);
      }
    } else if (k == "trials") s.trials = get_int(v, k);
    else if (k == "train_size") s.train_size = get_int(v, k);
    else if (k == "test_size") s.test_size = get_int(v, k);
    else if (k == "repetitions") s.repetitions = get_int(v, k);
    else if (k == "master_seed") {
      if (!v.is_number_unsigned())
        throw ConfigError("master_seed: expected a non-negative integer");
      s.master_seed = v.get<std::uint64_t>();
    } else if (k == "ocsvm_nu") s.ocsvm.nu = get_number(v, k);
    else if (k == "ocsvm_gamma") {
      if (v.is_string()) {
        if (v.get<std::string>() != "median-heuristic")
          throw ConfigError("ocsvm_gamma: expected a number or \"median-heuristic\"");
        s.ocsvm.gamma.reset();
      } else {
        s.ocsvm.gamma = get_number(v, k);
      }
    } else if (k == "ocsvm_tol") s.ocsvm.solver_tol = get_number(v, k);
    else if (k == "ocsvm_max_iters") s.ocsvm.max_iters = get_int(v, k);
    else if (k == "grid_step_deg") s.grid_step_deg = get_number(v, k);
    else if (k == "cost_curve_eve_distance_m") s.cost_curve_eve_distance_m = get_number(v, k);
    else if (k == "cost_curve_eve_aoa_deg") s.cost_curve_eve_aoa_deg = get_number(v, k);
    else if (k == "cost_curve_noiseless") s.cost_curve_noiseless = detail::get_field<bool>(v, k);
    else throw ConfigError("unknown config key '" + k + "'");
  }
  s.validate();
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

/// "default" (or an empty path) selects the built-in defaults.
inline Scenario load_scenario(const std::string& path) {
  if (path.empty() || path == "default") {
    Scenario s;
    s.validate();
    return s;
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

/// FNV-1a over the canonical (sorted-key) JSON dump.
inline std::uint64_t config_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace aoa_auth
