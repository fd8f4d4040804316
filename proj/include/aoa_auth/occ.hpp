#pragma once

// One-class SVM on scalar AoA features with a Gaussian kernel.
//
// Dual problem (Scholkopf et al. scaling):
//   minimize   0.5 * sum_ij a_i a_j K(x_i, x_j)
//   subject to 0 <= a_i <= 1/(nu l),  sum_i a_i = 1
// Decision function f(x) = sum_i a_i K(x_i, x) - rho; accept iff f(x) > 0.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aoa_auth/errors.hpp"

namespace aoa_auth {

struct OcsvmParams {
  double nu = 0.015;
  std::optional<double> gamma;  // deg^-2; empty selects the median heuristic
  double median_floor_deg2 = 0.0025;
  double solver_tol = 1e-6;
  long max_iters = 100'000;

  void validate() const {
    if (!(nu > 0.0 && nu <= 1.0))
      throw ConfigError("ocsvm_nu: must be in (0, 1], got " + std::to_string(nu));
    if (gamma && !(*gamma > 0.0))
      throw ConfigError("ocsvm_gamma: must be > 0 when explicit");
    if (!(median_floor_deg2 > 0.0))
      throw ConfigError("median floor must be > 0");
    if (!(solver_tol > 0.0)) throw ConfigError("ocsvm_tol: must be > 0");
    if (max_iters < 1) throw ConfigError("ocsvm_max_iters: must be >= 1");
  }
};

inline double kernel(double x, double y, double gamma) {
  const double d = x - y;
  return std::exp(-gamma * d * d);
}

/// 1 / (2 max(m, floor)) with m the median pairwise squared distance.
/// Uses at most the first 2000 samples.
inline double median_heuristic_gamma(std::span<const double> samples,
                                     double floor_deg2) {
  const std::size_t l = std::min<std::size_t>(samples.size(), 2000);
  std::vector<double> d2;
  d2.reserve(l * (l - 1) / 2);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i + 1; j < l; ++j) {
      const double d = samples[i] - samples[j];
      d2.push_back(d * d);
    }
  double m = 0.0;
  if (!d2.empty()) {
    const std::size_t mid = d2.size() / 2;
    std::nth_element(d2.begin(), d2.begin() + static_cast<long>(mid), d2.end());
    m = d2[mid];
    if (d2.size() % 2 == 0) {
      const double lower = *std::max_element(d2.begin(), d2.begin() + static_cast<long>(mid));
      m = 0.5 * (m + lower);
    }
  }
  return 1.0 / (2.0 * std::max(m, floor_deg2));
}

struct OcsvmModel {
  std::vector<double> support_points;  // degrees, only entries with alpha > 0
  std::vector<double> alphas;
  double rho = 0.0;
  double gamma = 1.0;
  double nu = 0.015;
  std::size_t training_size = 0;
  bool rho_from_bounds = false;  // no margin support vector existed
  long iterations = 0;
  double kkt_gap = 0.0;

  double decision_value(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < support_points.size(); ++i)
      s += alphas[i] * kernel(support_points[i], x, gamma);
    return s - rho;
  }
};

struct Decision {
  bool accept = false;
  double decision_value = 0.0;
};

/// Ties (exactly zero) reject.
inline Decision decide(const OcsvmModel& model, double x) {
  const double v = model.decision_value(x);
  return {v > 0.0, v};
}

/// Full dual solution over all training points, used for diagnostics and
/// oracle comparisons; train() keeps only the support vectors.
struct OcsvmDualSolution {
  std::vector<double> alphas;
  std::vector<double> gradient;  // K alpha
  double objective = 0.0;
  double kkt_gap = 0.0;
  long iterations = 0;
};

namespace detail {

/// SMO with second-order working-set selection (Fan, Chen, Lin 2005),
/// specialised to the one-class dual where every label is +1.
inline OcsvmDualSolution solve_ocsvm_dual(std::span<const double> x, double gamma,
                                          double upper, double tol, long max_iters) {
  const std::size_t l = x.size();
  constexpr double kTau = 1e-12;
  OcsvmDualSolution sol;
  auto& a = sol.alphas;
  auto& g = sol.gradient;
  a.assign(l, 0.0);
  g.assign(l, 0.0);

  // Feasible start: fill alphas to the box bound in order until the
  // simplex constraint is met.
  double remaining = 1.0;
  for (std::size_t i = 0; i < l && remaining > 0.0; ++i) {
    a[i] = std::min(upper, remaining);
    remaining -= a[i];
  }
  for (std::size_t i = 0; i < l; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t t = 0; t < l; ++t) g[t] += a[i] * kernel(x[i], x[t], gamma);
  }

  std::vector<double> ki(l), kj(l);
  long it = 0;
  for (;; ++it) {
    // i: steepest ascent candidate among alphas that may grow.
    std::size_t i = l;
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l; ++t)
      if (a[t] < upper && -g[t] >= gmax) {
        gmax = -g[t];
        i = t;
      }
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l; ++t)
      if (a[t] > 0.0) gmin = std::min(gmin, -g[t]);
    sol.kkt_gap = gmax - gmin;
    if (i == l || sol.kkt_gap < tol) break;
    if (it >= max_iters) {
      std::ostringstream msg;
      msg << "one-class SVM did not converge within " << max_iters
          << " iterations; worst KKT violation " << sol.kkt_gap;
      throw TrainingError(msg.str());
    }

    for (std::size_t t = 0; t < l; ++t) ki[t] = kernel(x[i], x[t], gamma);
    std::size_t j = l;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l; ++t) {
      if (!(a[t] > 0.0)) continue;
      const double b = gmax + g[t];  // = G_t - G_i
      if (b <= 0.0) continue;
      double quad = 2.0 - 2.0 * ki[t];  // K_ii + K_tt - 2 K_it with K_tt = 1
      if (quad <= 0.0) quad = kTau;
      const double score = -(b * b) / quad;
      if (score <= best) {
        best = score;
        j = t;
      }
    }
    if (j == l) break;

    for (std::size_t t = 0; t < l; ++t) kj[t] = kernel(x[j], x[t], gamma);
    double quad = 2.0 - 2.0 * ki[j];
    if (quad <= 0.0) quad = kTau;
    double delta = (g[j] - g[i]) / quad;
    delta = std::min({delta, upper - a[i], a[j]});
    if (!(delta > 0.0)) break;
    a[i] += delta;
    a[j] -= delta;
    // Snap to the bounds to keep the active set exact.
    if (upper - a[i] <= 1e-15 * upper) a[i] = upper;
    if (a[j] <= 1e-15 * upper) a[j] = 0.0;
    for (std::size_t t = 0; t < l; ++t) g[t] += delta * (ki[t] - kj[t]);
  }
  sol.iterations = it;

  double obj = 0.0;
  for (std::size_t t = 0; t < l; ++t) obj += a[t] * g[t];
  sol.objective = 0.5 * obj;
  return sol;
}

}  // namespace detail

inline double resolve_gamma(std::span<const double> samples, const OcsvmParams& params) {
  return params.gamma ? *params.gamma
                      : median_heuristic_gamma(samples, params.median_floor_deg2);
}

/// Solves the dual without extracting a model.
inline OcsvmDualSolution solve_dual(std::span<const double> samples,
                                    const OcsvmParams& params) {
  params.validate();
  if (samples.size() < 2)
    throw TrainingError("one-class SVM needs at least 2 training samples, got " +
                        std::to_string(samples.size()));
  const double gamma = resolve_gamma(samples, params);
  const double upper = 1.0 / (params.nu * static_cast<double>(samples.size()));
  return detail::solve_ocsvm_dual(samples, gamma, upper, params.solver_tol,
                                  params.max_iters);
}

inline OcsvmModel train(std::span<const double> samples, const OcsvmParams& params) {
  auto sol = solve_dual(samples, params);
  const double gamma = resolve_gamma(samples, params);
  const double upper = 1.0 / (params.nu * static_cast<double>(samples.size()));

  OcsvmModel model;
  model.gamma = gamma;
  model.nu = params.nu;
  model.training_size = samples.size();
  model.iterations = sol.iterations;
  model.kkt_gap = sol.kkt_gap;

  double sum_free = 0.0;
  std::size_t n_free = 0;
  double g_lo = std::numeric_limits<double>::infinity();
  double g_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ai = sol.alphas[i];
    if (ai <= 0.0) continue;
    model.support_points.push_back(samples[i]);
    model.alphas.push_back(ai);
    g_lo = std::min(g_lo, sol.gradient[i]);
    g_hi = std::max(g_hi, sol.gradient[i]);
    if (ai < upper) {
      sum_free += sol.gradient[i];
      ++n_free;
    }
  }
  if (n_free > 0) {
    model.rho = sum_free / static_cast<double>(n_free);
  } else {
    model.rho = 0.5 * (g_lo + g_hi);
    model.rho_from_bounds = true;
  }
  return model;
}

/// Header "gamma rho nu l", then one "support_point alpha" line per SV.
inline void save_model(std::ostream& os, const OcsvmModel& m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %zu\n", m.gamma, m.rho, m.nu,
                m.training_size);
  os << buf;
  for (std::size_t i = 0; i < m.support_points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", m.support_points[i], m.alphas[i]);
    os << buf;
  }
  if (!os) throw IoError("failed to write one-class SVM model");
}

inline OcsvmModel load_model(std::istream& is) {
  OcsvmModel m;
  std::string line;
  if (!std::getline(is, line)) throw IoError("model file is empty");
  {
    std::istringstream hs(line);
    if (!(hs >> m.gamma >> m.rho >> m.nu >> m.training_size))
      throw IoError("model header must be 'gamma rho nu l'");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x = 0.0, a = 0.0;
    if (!(ls >> x >> a)) throw IoError("bad support vector line: " + line);
    m.support_points.push_back(x);
    m.alphas.push_back(a);
  }
  return m;
}

}  // namespace aoa_auth
