// Command-line front end for the AoA authentication simulator.
//
// Data goes to files (or stdout for `estimate`/`validate-config`);
// progress and diagnostics go to stderr.
//
// Exit codes: 0 ok, 2 usage/config error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aoa_auth/aoa_auth.hpp"

namespace fs = std::filesystem;
using namespace aoa_auth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> grid_step;
  std::string out = "out";
  int workers = default_workers();
};

void add_common(CLI::App* cmd, Overrides& o, bool with_out) {
  cmd->add_option("--config", o.config,
                  "Scenario config file (flat JSON), or 'default' for the built-in setup")
      ->required();
  cmd->add_option("--seed", o.seed, "Master seed (unsigned 64-bit integer)");
  cmd->add_option("--trials", o.trials,
                  "Monte-Carlo trials per sweep point for rmse-sweep (count)");
  cmd->add_option("--grid-step", o.grid_step,
                  "Estimator grid spacing (degrees, in (0, 10])");
  cmd->add_option("--workers", o.workers,
                  "Worker threads (count); never changes results")
      ->check(CLI::PositiveNumber);
  if (with_out) cmd->add_option("--out", o.out, "Output directory (path)");
}

Scenario resolve(const Overrides& o) {
  Scenario s = load_scenario(o.config);
  if (o.seed) s.master_seed = *o.seed;
  if (o.trials) s.trials = *o.trials;
  if (o.grid_step) s.grid_step_deg = *o.grid_step;
  s.validate();
  return s;
}

void progress(const std::string& msg) { std::cerr << msg << '\n'; }

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  auto os = open_output(path);
  body(os);
  os.flush();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

int report(const Error& e) {
  std::cerr << "error [" << stage_name(e.stage()) << "]: " << e.what() << '\n';
  return e.stage() == Stage::config ? kExitConfig : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AoA-based physical-layer authentication simulator"};
  app.require_subcommand(1);

  Overrides o;
  double theta_deg = 0.0;
  double distance_m = 10.0;
  std::string attack_name = "none";

  auto* cost = app.add_subcommand("cost-curve", "Estimator cost curves for Alice and each attack");
  add_common(cost, o, true);
  auto* rmse_cmd = app.add_subcommand("rmse-sweep", "AoA RMSE versus Eve's distance and angle");
  add_common(rmse_cmd, o, true);
  auto* auth = app.add_subcommand("auth-sweep", "OC-SVM P_FA / P_MD / accuracy sweep");
  add_common(auth, o, true);
  auto* est = app.add_subcommand("estimate", "Estimate the AoA of a single observation");
  add_common(est, o, false);
  est->add_option("--theta", theta_deg, "Transmitter AoA (degrees, in (-90, 90))")->required();
  est->add_option("--distance", distance_m, "Transmitter distance (meters)");
  est->add_option("--attack", attack_name, "Transmit strategy: none, random, code, location");
  auto* validate = app.add_subcommand("validate-config", "Check a config file and print it");
  validate->add_option("--config", o.config, "Scenario config file (flat JSON) or 'default'")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (validate->parsed()) {
      const Scenario s = load_scenario(o.config);
      std::cout << to_json(s).dump(2) << '\n';
      return kExitOk;
    }

    if (est->parsed()) {
      const Scenario s = resolve(o);
      const auto kind = parse_attack_kind(attack_name);
      if (!kind) throw ConfigError("--attack: unknown attack '" + attack_name + "'");
      if (!(theta_deg > -90.0 && theta_deg < 90.0))
        throw ConfigError("--theta: must be in (-90, 90) degrees");
      if (!(distance_m > 0.0)) throw ConfigError("--distance: must be > 0 meters");
      const auto e = run_single_estimate(s, {distance_m, theta_deg}, *kind);
      std::cout << "theta_hat_deg=" << e.theta_hat_deg << " cost=" << e.cost_at_min << '\n';
      return kExitOk;
    }

    const fs::path out(o.out);
    if (cost->parsed()) {
      const Scenario s = resolve(o);
      ensure_directory(out);
      progress("cost-curve: evaluating " + std::to_string(AngleGrid(s.grid_step_deg).size()) +
               " grid points per source");
      std::vector<std::string> files;
      for (const auto& c : run_cost_curve_experiment(s)) {
        const std::string name = "cost_curve_" + c.source + ".csv";
        write_file(out / name, [&](std::ostream& os) { write_cost_curve_csv(os, c.curve); });
        files.push_back(name);
        progress("  " + c.source + ": theta_hat=" + std::to_string(c.estimate.theta_hat_deg));
      }
      write_manifest(out, "cost-curve", s, files);
    } else if (rmse_cmd->parsed()) {
      const Scenario s = resolve(o);
      ensure_directory(out);
      const auto rows = run_rmse_sweep(s, o.workers, progress);
      write_file(out / "rmse_sweep.csv", [&](std::ostream& os) { write_rmse_csv(os, rows); });
      write_manifest(out, "rmse-sweep", s, {"rmse_sweep.csv"});
    } else if (auth->parsed()) {
      const Scenario s = resolve(o);
      ensure_directory(out);
      const auto result = run_auth_sweep(s, o.workers, progress);
      write_file(out / "auth_sweep.csv",
                 [&](std::ostream& os) { write_metrics_csv(os, result.rows()); });
      write_manifest(out, "auth-sweep", s, {"auth_sweep.csv"});
    }
    progress("wrote " + out.string());
    return kExitOk;
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error [simulation]: " << e.what() << '\n';
    return kExitRuntime;
  }
}
