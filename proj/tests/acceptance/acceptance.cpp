// Acceptance suite: one PASS/FAIL line per criterion, preceded by the
// measured values it was judged on.
//
// Exit status is 0 when every criterion passes or is listed in
// --known-red; a known-red criterion still prints FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoa_auth/aoa_auth.hpp"
#include "support/oracles.hpp"

using namespace aoa_auth;
namespace fs = std::filesystem;

namespace {

struct Options {
  int workers = default_workers();
  int repetitions = 10;
  int test_size = 20000;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<int> known_red;
  std::string work_dir = (fs::temp_directory_path() / "aoa_auth_acceptance").string();
};

class Report {
 public:
  void detail(const std::string& line) { std::cout << "    " << line << '\n'; }

  void verdict(int id, bool ok, const std::string& summary) {
    results_[id] = ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << summary
              << std::endl;
  }

  int exit_code(const std::set<int>& known_red) const {
    int unexpected = 0;
    for (const auto& [id, ok] : results_)
      if (!ok && !known_red.count(id)) ++unexpected;
    return unexpected == 0 ? 0 : 1;
  }

  void summary(const std::set<int>& known_red) const {
    int pass = 0;
    std::string red;
    for (const auto& [id, ok] : results_) {
      if (ok) {
        ++pass;
      } else {
        red += " " + std::to_string(id) + (known_red.count(id) ? "(known)" : "");
      }
    }
    std::cout << "summary: " << pass << "/" << results_.size() << " criteria pass";
    if (!red.empty()) std::cout << "; failing:" << red;
    std::cout << '\n';
  }

 private:
  std::map<int, bool> results_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<double> kDistances{1,   5,   10,  25,  50,  100,  150,
                                     200, 250, 400, 500, 750, 1000, 2000};

Scenario base(const Options& o) {
  Scenario s;
  s.master_seed = o.seed;
  s.repetitions = o.repetitions;
  s.test_size = o.test_size;
  s.trials = o.trials;
  s.eve_distances_m = kDistances;
  return s;
}

const MetricsRow& row_at(const std::vector<MetricsRow>& rows, const std::string& attack,
                         double aoa, double d) {
  for (const auto& r : rows)
    if (r.attack == attack && r.theta_e_deg == aoa && r.d_e_m == d) return r;
  throw std::runtime_error("missing sweep row " + attack);
}

double rmse_at(const std::vector<RmseRow>& rows, AttackKind k, double aoa, double d) {
  for (const auto& r : rows)
    if (r.attack == k && r.theta_e_deg == aoa && r.d_e_m == d) return r.rmse_deg;
  throw std::runtime_error("missing rmse row");
}

// --- Monte-Carlo criteria ------------------------------------------------------

struct SweepData {
  std::vector<MetricsRow> lba;       // LBA at 30 and 45 degrees, all distances
  std::vector<MetricsRow> ordering;  // LBA at 5, 20, 45, 60 degrees, 50 m
  std::vector<MetricsRow> cba;       // CBA at 45 degrees, all distances
  double lba45_seconds = 0.0;
};

SweepData run_sweeps(const Options& o) {
  SweepData d;
  auto progress = [](const std::string&) {};

  Scenario lba45 = base(o);
  lba45.attacks = {AttackKind::LocationBased};
  lba45.eve_aoas_deg = {45.0};
  auto t0 = std::chrono::steady_clock::now();
  d.lba = run_auth_sweep(lba45, o.workers, progress).rows();
  d.lba45_seconds = elapsed_s(t0);

  Scenario lba30 = lba45;
  lba30.eve_aoas_deg = {30.0};
  for (const auto& r : run_auth_sweep(lba30, o.workers, progress).rows()) d.lba.push_back(r);

  Scenario order = base(o);
  order.attacks = {AttackKind::LocationBased};
  order.eve_aoas_deg = {5.0, 20.0, 45.0, 60.0};
  order.eve_distances_m = {50.0};
  d.ordering = run_auth_sweep(order, o.workers, progress).rows();

  Scenario cba = base(o);
  cba.attacks = {AttackKind::CodeBased};
  cba.eve_aoas_deg = {45.0};
  d.cba = run_auth_sweep(cba, o.workers, progress).rows();
  return d;
}

void criterion_1(Report& rep, const SweepData& d) {
  const std::map<double, double> targets{{1, 0.497}, {10, 0.716}, {100, 0.959}, {1000, 0.999}};
  bool ok = true;
  for (const auto& [dist, want] : targets) {
    const double acc = row_at(d.lba, "location", 45, dist).accuracy;
    const bool hit = std::abs(acc - want) <= 0.06;
    ok = ok && hit;
    rep.detail("LBA 45 deg, d=" + fmt("%g", dist) + " m: accuracy " + fmt("%.4f", acc) +
               " (target " + fmt("%.3f", want) + " +- 0.06)" + (hit ? "" : "  <-- out"));
  }
  double prev = -1.0;
  bool mono = true;
  std::string curve;
  for (double dist : kDistances) {
    const double acc = row_at(d.lba, "location", 45, dist).accuracy;
    if (acc < prev - 0.03) mono = false;
    prev = std::max(prev, acc);
    curve += fmt(" %.3f", acc);
  }
  rep.detail("accuracy vs distance:" + curve + (mono ? "" : "  <-- not monotone"));
  rep.detail("LBA 45 deg sweep wall time " + fmt("%.1f", d.lba45_seconds) + " s (limit 600 s)");
  const bool fast = d.lba45_seconds < 600.0;
  rep.verdict(1, ok && mono && fast,
              "LBA 45 deg accuracy matches {0.497, 0.716, 0.959, 0.999} +- 0.06, monotone in d, "
              "< 10 min");
}

void criterion_2(Report& rep, const SweepData& d) {
  const double md10 = row_at(d.lba, "location", 45, 10).p_md;
  const double md1 = row_at(d.lba, "location", 45, 1).p_md;
  std::vector<double> md50;
  for (double a : {5.0, 20.0, 45.0, 60.0}) md50.push_back(row_at(d.ordering, "location", a, 50).p_md);
  const bool a = std::abs(md10 - 0.525) <= 0.08;
  const bool b = md1 >= 0.9;
  const bool c = md50[0] > md50[1] && md50[1] > md50[2] && md50[2] > md50[3];
  rep.detail("P_MD(10 m) = " + fmt("%.4f", md10) + " (target 0.525 +- 0.08)" + (a ? "" : "  <-- out"));
  rep.detail("P_MD(1 m) = " + fmt("%.4f", md1) + " (need >= 0.9)");
  rep.detail("P_MD at 50 m for 5/20/45/60 deg:" + fmt(" %.4f", md50[0]) + fmt(" %.4f", md50[1]) +
             fmt(" %.4f", md50[2]) + fmt(" %.4f", md50[3]) + (c ? "" : "  <-- order broken"));
  rep.verdict(2, a && b && c, "LBA P_MD(10 m) = 0.525 +- 0.08, P_MD(1 m) >= 0.9, ordering at 50 m");
}

void criterion_3(Report& rep, const SweepData& d) {
  double worst = 0.0;
  for (double dist : kDistances) worst = std::max(worst, row_at(d.lba, "location", 30, dist).p_md);
  rep.detail("max P_MD over distances, LBA 30 deg: " + fmt("%.5f", worst));
  rep.verdict(3, worst <= 0.01, "LBA 30 deg P_MD <= 0.01 at every distance");
}

void criterion_4(Report& rep, const SweepData& d) {
  double min_acc = 1.0, max_md = 0.0;
  for (double dist : kDistances) {
    const auto& r = row_at(d.cba, "code", 45, dist);
    min_acc = std::min(min_acc, r.accuracy);
    if (dist <= 150.0) max_md = std::max(max_md, r.p_md);
  }
  rep.detail("CBA 45 deg: min accuracy " + fmt("%.4f", min_acc) + ", max P_MD (d <= 150 m) " +
             fmt("%.5f", max_md));
  rep.verdict(4, min_acc >= 0.97 && max_md <= 0.01,
              "CBA 45 deg accuracy >= 0.97 everywhere, P_MD <= 0.01 for d <= 150 m");
}

void criterion_5(Report& rep, const SweepData& d) {
  double lo = 1.0, hi = 0.0;
  std::size_t n = 0;
  for (const auto* rows : {&d.lba, &d.ordering, &d.cba})
    for (const auto& r : *rows) {
      lo = std::min(lo, r.p_fa);
      hi = std::max(hi, r.p_fa);
      ++n;
    }
  rep.detail("P_FA over " + std::to_string(n) + " sweep points: min " + fmt("%.4f", lo) +
             ", max " + fmt("%.4f", hi) + ", spread " + fmt("%.4f", hi - lo));
  rep.verdict(5, lo >= 0.004 && hi <= 0.03 && hi - lo < 0.01,
              "P_FA in [0.004, 0.03] and varies by < 0.01 across the Eve sweep");
}

void criterion_6(Report& rep, const Options& o) {
  Scenario lba = base(o);
  lba.attacks = {AttackKind::LocationBased, AttackKind::CodeBased};
  lba.eve_aoas_deg = {30.0, 45.0};
  const auto rows = run_rmse_sweep(lba, o.workers);
  const double l10 = rmse_at(rows, AttackKind::LocationBased, 45, 10);
  const double l1000 = rmse_at(rows, AttackKind::LocationBased, 45, 1000);
  const double c10 = rmse_at(rows, AttackKind::CodeBased, 45, 10);
  double min30 = 1e9;
  for (double dist : kDistances) min30 = std::min(min30, rmse_at(rows, AttackKind::LocationBased, 30, dist));
  rep.detail("RMSE LBA 45: " + fmt("%.3f", l10) + " deg at 10 m, " + fmt("%.3f", l1000) +
             " deg at 1000 m; CBA 45 at 10 m: " + fmt("%.3f", c10) + " deg");
  rep.detail("min RMSE LBA 30 over distances: " + fmt("%.2f", min30) + " deg (" +
             std::to_string(o.trials) + " trials per point)");
  rep.verdict(6, l1000 > l10 && c10 > l10 && min30 >= 20.0,
              "RMSE trends: LBA45 far > near, CBA > LBA at 10 m, LBA30 >= 20 deg");
}

// --- exact criteria -----------------------------------------------------------

void criterion_7(Report& rep) {
  const auto schedule = ProbeSchedule::uniform(17, 16);
  const auto alice = PilotSequence::constant(17);
  const ArrayConfig cfg;
  const double floor = null_floor(16);
  Rng rng(70707);
  std::uniform_real_distribution<double> ang(-89.0, 89.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  int beams = 0;
  for (int i = 0; i < 50; ++i) {
    const double ta = ang(rng), te = ang(rng), phase = ph(rng), dist = 1.0 + 40.0 * i;
    AttackContext ctx;
    ctx.schedule = &schedule;
    ctx.alice_pilots = &alice;
    ctx.target_aoa_deg = ta;
    ctx.eve_aoa_deg = te;
    const auto pilots = location_based_attack(ctx);
    const auto y = synthesize_observation(schedule, {dist, te}, pilots, phase, cfg, nullptr);
    const double amp = std::sqrt(cfg.tx_power_watts()) * oracle::amplitude(dist, cfg.carrier_freq_hz);
    // Relative to the whole target vector, so beams near a null of Alice's
    // pattern do not divide by a rounding-level magnitude.
    std::vector<cdouble> want(17);
    double scale = 0.0;
    for (std::size_t t = 0; t < 17; ++t) {
      want[t] = std::polar(amp, phase) * ctx.normalization *
                oracle::beam_gain(schedule.probe_angles_deg()[t], ta, 16) * alice.symbols()[t];
      scale = std::max(scale, std::abs(want[t]));
    }
    for (std::size_t t = 0; t < 17; ++t) {
      if (std::norm(oracle::beam_gain(schedule.probe_angles_deg()[t], te, 16)) < floor) continue;
      const double err = std::abs(y.samples[t] - want[t]) / std::max(std::abs(want[t]), 1e-6 * scale);
      worst = std::max(worst, err);
      ++beams;
    }
  }
  rep.detail("50 random (theta_A, theta_E) pairs, " + std::to_string(beams) +
             " non-null beams, worst relative error " + fmt("%.3g", worst));
  rep.verdict(7, worst < 1e-10, "location attack reproduces the target's noiseless response");
}

void criterion_8(Report& rep) {
  const double g = std::abs(beam_gain(steering_vector(0.0, 16), 30.0));
  rep.detail("|a(0)^H a(30)| = " + fmt("%.3g", g));
  rep.verdict(8, g < 1e-9, "beam null w^H a(30 deg) = 0 for w = a(0 deg), N = 16");
}

void criterion_9(Report& rep) {
  const auto schedule = ProbeSchedule::uniform(17, 16);
  const auto alice = PilotSequence::constant(17);
  const ArrayConfig cfg;
  const double step = 0.05, fine = step / 10.0;
  const std::size_t n_fine = static_cast<std::size_t>(std::lround(180.0 / fine)) + 1;
  std::vector<std::vector<cdouble>> table(n_fine);
  for (std::size_t k = 0; k < n_fine; ++k)
    table[k] = oracle::response(schedule.probe_angles_deg(), -90.0 + static_cast<double>(k) * fine,
                                alice, 16);

  const AoaEstimator est(schedule, alice, step);
  Rng rng(90909);
  std::uniform_real_distribution<double> ang(-80.0, 80.0);
  std::uniform_real_distribution<double> logd(0.5, 3.0);
  const AttackKind kinds[] = {AttackKind::None, AttackKind::CodeBased, AttackKind::LocationBased};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double th = ang(rng), dist = std::pow(10.0, logd(rng));
    AttackContext ctx;
    ctx.schedule = &schedule;
    ctx.alice_pilots = &alice;
    ctx.target_aoa_deg = 0.0;
    ctx.eve_aoa_deg = th;
    const auto pilots = make_attack_pilots(kinds[i % 3], ctx, rng);
    const auto y = synthesize_observation(schedule, {dist, th}, pilots, 0.0, cfg, &rng);
    const double ref = -90.0 + static_cast<double>(oracle::argmin_scan(table, y.samples)) * fine;
    worst = std::max(worst, std::abs(est.estimate(y).theta_hat_deg - ref));
  }
  const auto y0 = synthesize_observation(schedule, {10.0, 0.0}, alice, 0.9, cfg, nullptr);
  const auto e0 = est.estimate(y0);
  const double rel0 = e0.cost_at_min / energy(y0.samples);
  rep.detail("100 noisy instances: worst |grid+refine - fine scan| = " + fmt("%.4f", worst) +
             " deg (one step = 0.05)");
  rep.detail("noiseless Alice: theta_hat = " + fmt("%.3g", e0.theta_hat_deg) +
             " deg, cost/||y||^2 = " + fmt("%.3g", rel0));
  rep.verdict(9, worst <= step && std::abs(e0.theta_hat_deg) < 1e-6 && rel0 < 1e-12,
              "estimator matches 10x finer brute force; noiseless minimum 0 at theta_A");
}

void criterion_10(Report& rep, const Options& o) {
  Rng rng(101010);
  std::uniform_int_distribution<int> size(3, 20);
  std::uniform_real_distribution<double> nu_d(0.05, 0.9), gamma_d(0.05, 3.0);
  std::normal_distribution<double> pt(0.0, 1.5);
  double obj_gap = 0.0, kkt = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(static_cast<std::size_t>(size(rng)));
    for (auto& v : x) v = pt(rng);
    OcsvmParams p;
    p.nu = nu_d(rng);
    p.gamma = gamma_d(rng);
    const double c = 1.0 / (p.nu * static_cast<double>(x.size()));
    const auto sol = solve_dual(x, p);
    obj_gap = std::max(obj_gap, std::abs(sol.objective - oracle::one_class_dual_min(x, *p.gamma, c)));
    kkt = std::max(kkt, oracle::kkt_residual(x, sol.alphas, *p.gamma, c));
  }
  rep.detail("20 random instances: max |objective - projected-gradient oracle| = " +
             fmt("%.3g", obj_gap) + ", max KKT residual " + fmt("%.3g", kkt));

  Scenario s = base(o);
  const Simulator sim(s);
  double worst_nu = 0.0;
  const int sets = std::min(o.repetitions, 5);
  for (int r = 0; r < sets; ++r) {
    const auto x = alice_training_samples(sim, r);
    const auto m = train(x, s.effective_ocsvm());
    int rejected = 0;
    for (double v : x) rejected += decide(m, v).accept ? 0 : 1;
    const double frac = rejected / static_cast<double>(x.size());
    worst_nu = std::max(worst_nu, std::abs(frac - s.ocsvm.nu));
    rep.detail("training set " + std::to_string(r) + ": rejected fraction " + fmt("%.4f", frac) +
               " (nu = " + fmt("%g", s.ocsvm.nu) + ")");
  }
  rep.verdict(10, obj_gap < 1e-6 && kkt < 1e-6 && worst_nu <= 0.01,
              "OC-SVM dual matches oracle, KKT < 1e-6, nu-property within 0.01");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_11(Report& rep, const Options& o) {
  Scenario s = base(o);
  s.eve_distances_m = {10.0, 500.0};
  s.eve_aoas_deg = {30.0, 45.0};
  s.attacks = {AttackKind::LocationBased, AttackKind::CodeBased, AttackKind::Random};
  s.train_size = 300;
  s.test_size = 400;
  s.repetitions = 3;
  s.trials = 100;
  const fs::path root(o.work_dir);
  std::vector<std::string> files;
  bool same = true;
  for (int workers : {1, 3}) {
    const fs::path dir = root / ("workers" + std::to_string(workers));
    ensure_directory(dir);
    {
      auto os = open_output(dir / "auth_sweep.csv");
      write_metrics_csv(os, run_auth_sweep(s, workers).rows());
    }
    {
      auto os = open_output(dir / "rmse_sweep.csv");
      write_rmse_csv(os, run_rmse_sweep(s, workers));
    }
  }
  for (const char* f : {"auth_sweep.csv", "rmse_sweep.csv"}) {
    const auto a = slurp(root / "workers1" / f);
    const auto b = slurp(root / "workers3" / f);
    const bool eq = !a.empty() && a == b;
    same = same && eq;
    rep.detail(std::string(f) + ": " + std::to_string(a.size()) + " bytes, " +
               (eq ? "identical" : "DIFFERENT") + " for 1 vs 3 workers");
  }
  fs::remove_all(root);
  rep.verdict(11, same, "same seed gives byte-identical CSVs for any worker count");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"AoA authentication acceptance suite"};
  app.add_option("--workers", o.workers, "Worker threads (count)")->check(CLI::PositiveNumber);
  app.add_option("--repetitions", o.repetitions, "Classifier repetitions per sweep (count)")
      ->check(CLI::PositiveNumber);
  app.add_option("--test-size", o.test_size, "Balanced test samples per sweep point (count)")
      ->check(CLI::PositiveNumber);
  app.add_option("--trials", o.trials, "RMSE trials per sweep point (count)")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--known-red", o.known_red,
                 "Criteria expected to fail; they still print FAIL but do not fail the run");
  app.add_option("--work-dir", o.work_dir, "Scratch directory for the determinism check (path)");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> known_red(o.known_red.begin(), o.known_red.end());

  Report rep;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    std::cout << "Monte-Carlo sweeps: " << o.repetitions << " repetitions x " << o.test_size
              << " test samples per point, " << o.workers << " worker(s)" << std::endl;
    const SweepData d = run_sweeps(o);
    criterion_1(rep, d);
    criterion_2(rep, d);
    criterion_3(rep, d);
    criterion_4(rep, d);
    criterion_5(rep, d);
    criterion_6(rep, o);
    criterion_7(rep);
    criterion_8(rep);
    criterion_9(rep);
    criterion_10(rep, o);
    criterion_11(rep, o);
    rep.summary(known_red);
    std::cout << "total time " << fmt("%.1f", elapsed_s(t0)) << " s\n";
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << '\n';
    return 2;
  }
  return rep.exit_code(known_red);
}
