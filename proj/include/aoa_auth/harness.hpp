#pragma once

// Monte-Carlo experiment pipelines. All randomness is drawn from
// derive_trial_rng() keyed on (experiment, sweep point, repetition, trial,
// role), and every reduction is an ordered merge, so outputs depend only on
// the scenario and master seed, never on the worker count.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "aoa_auth/attacks.hpp"
#include "aoa_auth/config.hpp"
#include "aoa_auth/estimator.hpp"
#include "aoa_auth/metrics.hpp"
#include "aoa_auth/occ.hpp"
#include "aoa_auth/rng.hpp"

namespace aoa_auth {

enum class ExperimentId : std::uint64_t { cost_curve = 1, rmse = 2, auth = 3, estimate = 4 };
enum class Role : std::uint64_t { alice_train = 1, alice_test = 2, eve = 3 };

using ProgressFn = std::function<void(const std::string&)>;

/// Runs f(0..n-1) on up to `workers` threads. The first exception thrown
/// by any task is rethrown after all threads join.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& f) {
  const std::size_t nthreads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t w = 0; w < nthreads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Shared, immutable simulation state for one scenario.
class Simulator {
 public:
  explicit Simulator(const Scenario& s)
      : scenario_(s),
        schedule_(s.schedule()),
        alice_pilots_(PilotSequence::constant(schedule_.size())),
        estimator_(schedule_, alice_pilots_, s.grid_step_deg) {}

  const Scenario& scenario() const { return scenario_; }
  const ProbeSchedule& schedule() const { return schedule_; }
  const PilotSequence& alice_pilots() const { return alice_pilots_; }
  const AoaEstimator& estimator() const { return estimator_; }

  /// Eve's pilots for a deterministic attack; Random draws per trial.
  PilotSequence eve_pilots(AttackKind kind, double eve_aoa_deg, Rng& rng,
                           double* alpha = nullptr) const {
    AttackContext ctx;
    ctx.schedule = &schedule_;
    ctx.alice_pilots = &alice_pilots_;
    ctx.target_aoa_deg = scenario_.alice.aoa_deg;
    ctx.eve_aoa_deg = eve_aoa_deg;
    auto p = make_attack_pilots(kind, ctx, rng);
    if (alpha) *alpha = ctx.normalization;
    return p;
  }

  /// Fresh uniform channel phase, then noise, both from `rng`.
  BeamObservation observe(const NodeGeometry& g, const PilotSequence& pilots, Rng& rng,
                          bool noisy = true) const {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double ph = phase(rng);
    return synthesize_observation(schedule_, g, pilots, ph, scenario_.array,
                                  noisy ? &rng : nullptr);
  }

  double estimate(const NodeGeometry& g, const PilotSequence& pilots, Rng& rng) const {
    return estimator_.estimate(observe(g, pilots, rng)).theta_hat_deg;
  }

 private:
  Scenario scenario_;
  ProbeSchedule schedule_;
  PilotSequence alice_pilots_;
  AoaEstimator estimator_;
};

struct SweepPoint {
  AttackKind attack;
  std::size_t attack_index;
  std::size_t aoa_index;
  std::size_t distance_index;
  double theta_e_deg;
  double d_e_m;
};

/// Attacks x Eve AoAs x Eve distances, in that nesting order.
inline std::vector<SweepPoint> sweep_points(const Scenario& s) {
  std::vector<SweepPoint> pts;
  for (std::size_t a = 0; a < s.attacks.size(); ++a)
    for (std::size_t i = 0; i < s.eve_aoas_deg.size(); ++i)
      for (std::size_t j = 0; j < s.eve_distances_m.size(); ++j)
        pts.push_back({s.attacks[a], a, i, j, s.eve_aoas_deg[i], s.eve_distances_m[j]});
  return pts;
}

// --- cost curves ----------------------------------------------------------

struct NamedCostCurve {
  std::string source;  // alice, eve_none, random, code, location
  CostCurve curve;
  AoaEstimate estimate;
};

inline std::vector<NamedCostCurve> run_cost_curve_experiment(const Scenario& s) {
  s.validate();
  const Simulator sim(s);
  const NodeGeometry eve{s.cost_curve_eve_distance_m, s.cost_curve_eve_aoa_deg};
  const bool noisy = !s.cost_curve_noiseless;

  struct Source {
    const char* name;
    bool is_alice;
    AttackKind kind;
  };
  const Source sources[] = {{"alice", true, AttackKind::None},
                            {"eve_none", false, AttackKind::None},
                            {"random", false, AttackKind::Random},
                            {"code", false, AttackKind::CodeBased},
                            {"location", false, AttackKind::LocationBased}};
  std::vector<NamedCostCurve> out;
  std::uint64_t idx = 0;
  for (const auto& src : sources) {
    Rng rng = derive_trial_rng(s.master_seed, ExperimentId::cost_curve, idx++);
    const PilotSequence pilots =
        src.is_alice ? sim.alice_pilots() : sim.eve_pilots(src.kind, eve.aoa_deg, rng);
    const auto obs = sim.observe(src.is_alice ? s.alice : eve, pilots, rng, noisy);
    out.push_back({src.name,
                   cost_curve(sim.schedule(), obs, sim.alice_pilots(), s.grid_step_deg),
                   sim.estimator().estimate(obs)});
  }
  return out;
}

// --- RMSE sweep -------------------------------------------------------------

struct RmseRow {
  AttackKind attack;
  double theta_e_deg;
  double d_e_m;
  std::uint64_t trials;
  double rmse_deg;
};

inline std::vector<RmseRow> run_rmse_sweep(const Scenario& s, int workers = 1,
                                           const ProgressFn& progress = {}) {
  s.validate();
  const Simulator sim(s);
  const auto pts = sweep_points(s);
  std::vector<RmseRow> rows(pts.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(pts.size(), workers, [&](std::size_t p) {
    const auto& pt = pts[p];
    const NodeGeometry eve{pt.d_e_m, pt.theta_e_deg};
    Rng setup = derive_trial_rng(s.master_seed, ExperimentId::rmse,
                                 static_cast<std::uint64_t>(pt.attack), pt.aoa_index,
                                 pt.distance_index);
    const PilotSequence fixed = pt.attack == AttackKind::Random
                                    ? sim.alice_pilots()
                                    : sim.eve_pilots(pt.attack, pt.theta_e_deg, setup);
    std::vector<double> est(static_cast<std::size_t>(s.trials));
    for (int t = 0; t < s.trials; ++t) {
      Rng rng = derive_trial_rng(s.master_seed, ExperimentId::rmse,
                                 static_cast<std::uint64_t>(pt.attack), pt.aoa_index,
                                 pt.distance_index, t, Role::eve);
      const PilotSequence pilots = pt.attack == AttackKind::Random
                                       ? sim.eve_pilots(pt.attack, pt.theta_e_deg, rng)
                                       : fixed;
      est[static_cast<std::size_t>(t)] = sim.estimate(eve, pilots, rng);
    }
    rows[p] = {pt.attack, pt.theta_e_deg, pt.d_e_m, static_cast<std::uint64_t>(s.trials),
               rmse(est, s.alice.aoa_deg)};
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress("rmse-sweep: " + std::to_string(++done) + "/" + std::to_string(pts.size()));
    }
  });
  return rows;
}

// --- authentication sweep ---------------------------------------------------

struct AuthPointResult {
  SweepPoint point;
  ConfusionCounts counts;
  double eve_sq_error_sum = 0.0;  // against Alice's AoA
  std::uint64_t eve_samples = 0;
};

struct AuthSweepResult {
  std::vector<AuthPointResult> points;
  std::vector<OcsvmModel> models;  // one per repetition

  std::vector<MetricsRow> rows() const {
    std::vector<MetricsRow> out;
    for (const auto& p : points) {
      MetricsRow r;
      r.attack = std::string(to_string(p.point.attack));
      r.theta_e_deg = p.point.theta_e_deg;
      r.d_e_m = p.point.d_e_m;
      r.trials = p.counts.total();
      r.p_fa = p_fa(p.counts);
      r.p_md = p_md(p.counts);
      r.accuracy = accuracy(p.counts);
      r.rmse_deg = std::sqrt(p.eve_sq_error_sum / static_cast<double>(p.eve_samples));
      out.push_back(r);
    }
    return out;
  }
};

/// Alice's estimated AoAs forming the training set of repetition `rep`.
inline std::vector<double> alice_training_samples(const Simulator& sim, int rep) {
  const auto& s = sim.scenario();
  std::vector<double> samples(static_cast<std::size_t>(s.train_size));
  for (int i = 0; i < s.train_size; ++i) {
    Rng rng = derive_trial_rng(s.master_seed, ExperimentId::auth, rep, i, Role::alice_train);
    samples[static_cast<std::size_t>(i)] = sim.estimate(s.alice, sim.alice_pilots(), rng);
  }
  return samples;
}

/// Trains one OC-SVM per repetition on Alice's estimated AoAs.
inline OcsvmModel train_repetition(const Simulator& sim, int rep) {
  const auto& s = sim.scenario();
  const auto samples = alice_training_samples(sim, rep);
  try {
    return train(samples, s.effective_ocsvm());
  } catch (const TrainingError& e) {
    throw TrainingError("repetition " + std::to_string(rep) + ": " + e.what());
  }
}

inline AuthSweepResult run_auth_sweep(const Scenario& s, int workers = 1,
                                      const ProgressFn& progress = {}) {
  s.validate();
  const Simulator sim(s);
  const auto pts = sweep_points(s);
  const std::size_t reps = static_cast<std::size_t>(s.repetitions);
  const int half = s.test_size / 2;

  AuthSweepResult result;
  result.models.resize(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    result.models[r] = train_repetition(sim, static_cast<int>(r));
  });
  if (progress) progress("auth-sweep: trained " + std::to_string(reps) + " classifier(s)");

  std::vector<AuthPointResult> partial(reps * pts.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(partial.size(), workers, [&](std::size_t idx) {
    const std::size_t r = idx / pts.size();
    const auto& pt = pts[idx % pts.size()];
    const auto& model = result.models[r];
    const NodeGeometry eve{pt.d_e_m, pt.theta_e_deg};
    const auto kind = static_cast<std::uint64_t>(pt.attack);

    AuthPointResult out{pt, {}, 0.0, 0};
    Rng setup = derive_trial_rng(s.master_seed, ExperimentId::auth, r, kind, pt.aoa_index,
                                 pt.distance_index);
    const PilotSequence fixed = pt.attack == AttackKind::Random
                                    ? sim.alice_pilots()
                                    : sim.eve_pilots(pt.attack, pt.theta_e_deg, setup);
    for (int i = 0; i < half; ++i) {
      Rng rng = derive_trial_rng(s.master_seed, ExperimentId::auth, r, kind, pt.aoa_index,
                                 pt.distance_index, i, Role::alice_test);
      out.counts.record_legitimate(
          decide(model, sim.estimate(s.alice, sim.alice_pilots(), rng)).accept);
    }
    for (int i = 0; i < half; ++i) {
      Rng rng = derive_trial_rng(s.master_seed, ExperimentId::auth, r, kind, pt.aoa_index,
                                 pt.distance_index, i, Role::eve);
      const PilotSequence pilots = pt.attack == AttackKind::Random
                                       ? sim.eve_pilots(pt.attack, pt.theta_e_deg, rng)
                                       : fixed;
      const double th = sim.estimate(eve, pilots, rng);
      out.counts.record_attack(decide(model, th).accept);
      const double d = th - s.alice.aoa_deg;
      out.eve_sq_error_sum += d * d;
      ++out.eve_samples;
    }
    partial[idx] = out;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress("auth-sweep: " + std::to_string(++done) + "/" +
               std::to_string(partial.size()));
    }
  });

  // Ordered merge over repetitions.
  result.points.reserve(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) {
    AuthPointResult acc{pts[p], {}, 0.0, 0};
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& part = partial[r * pts.size() + p];
      acc.counts += part.counts;
      acc.eve_sq_error_sum += part.eve_sq_error_sum;
      acc.eve_samples += part.eve_samples;
    }
    result.points.push_back(acc);
  }
  return result;
}

// --- single-shot estimate ---------------------------------------------------

/// One observation from a transmitter at `geometry` using `attack` (None:
/// Alice's pilot), estimated with Alice's pilot.
inline AoaEstimate run_single_estimate(const Scenario& s, const NodeGeometry& geometry,
                                       AttackKind attack) {
  s.validate();
  const Simulator sim(s);
  Rng rng = derive_trial_rng(s.master_seed, ExperimentId::estimate);
  const PilotSequence pilots = sim.eve_pilots(attack, geometry.aoa_deg, rng);
  return sim.estimator().estimate(sim.observe(geometry, pilots, rng));
}

// --- output -----------------------------------------------------------------

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

inline void write_rmse_csv(std::ostream& os, const std::vector<RmseRow>& rows) {
  os << "attack,theta_e_deg,d_e_m,trials,rmse_deg\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%llu,%.10g\n",
                  std::string(to_string(r.attack)).c_str(), r.theta_e_deg, r.d_e_m,
                  static_cast<unsigned long long>(r.trials), r.rmse_deg);
    os << buf;
  }
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << kMetricsCsvHeader << '\n';
  for (const auto& r : rows) write_metrics_row(os, r);
}

/// manifest.json: experiment, config hash, master seed, files and the
/// effective configuration.
inline void write_manifest(const std::filesystem::path& dir, const std::string& experiment,
                           const Scenario& s, const std::vector<std::string>& files) {
  nlohmann::json m;
  m["experiment"] = experiment;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(s)));
  m["config_hash"] = hash;
  m["master_seed"] = s.master_seed;
  m["files"] = files;
  m["config"] = to_json(s);
  auto os = open_output(dir / "manifest.json");
  os << m.dump(2) << '\n';
  if (!os) throw IoError("failed writing manifest");
}

}  // namespace aoa_auth
