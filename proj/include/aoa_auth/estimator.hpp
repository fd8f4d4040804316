#pragma once

// Maximum-likelihood AoA estimation with the complex channel gain
// concentrated out:
//
//   theta_hat = argmin_theta || y - h_hat(theta) z(theta) ||^2,
//   h_hat(theta) = z^H y / ||z||^2,
//
// where z_t(theta) = (w_t^H a(theta)) s_t folds the known pilot into the
// model response. The cost equals ||y||^2 - |z^H y|^2 / ||z||^2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "aoa_auth/signal_model.hpp"

namespace aoa_auth {

/// z(theta) = [(w_t^H a(theta)) s_t]_t.
inline CVector model_response(const ProbeSchedule& schedule, double theta_deg,
                              std::span<const cdouble> pilots) {
  if (pilots.size() != schedule.size())
    throw SimulationError("model_response: pilot length does not match schedule");
  auto z = schedule.beam_gains(theta_deg);
  for (std::size_t t = 0; t < z.size(); ++t) z[t] *= pilots[t];
  return z;
}

/// Least-squares gain z^H y / ||z||^2; 0 when z vanishes.
inline cdouble gain_hat(std::span<const cdouble> z, std::span<const cdouble> y) {
  const double zz = energy(z);
  if (zz <= 0.0) return {0.0, 0.0};
  return inner_product(z, y) / zz;
}

/// ||y - h_hat z||^2 evaluated directly from the residual.
inline double residual_cost(std::span<const cdouble> z, std::span<const cdouble> y) {
  const cdouble h = gain_hat(z, y);
  double c = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) c += std::norm(y[t] - h * z[t]);
  return c;
}

/// Uniform grid over [-90, 90] with both endpoints. The spacing is the
/// largest value <= the requested step that divides the interval evenly.
class AngleGrid {
 public:
  static constexpr double kLo = -90.0;
  static constexpr double kHi = 90.0;

  explicit AngleGrid(double step_deg) {
    if (!(step_deg > 0.0 && step_deg <= 10.0))
      throw ConfigError("grid_step_deg: must be in (0, 10], got " +
                        std::to_string(step_deg));
    intervals_ = static_cast<std::size_t>(std::ceil((kHi - kLo) / step_deg - 1e-9));
  }

  std::size_t size() const { return intervals_ + 1; }
  double spacing() const { return (kHi - kLo) / static_cast<double>(intervals_); }
  double angle(std::size_t k) const {
    return kLo + (kHi - kLo) * static_cast<double>(k) / static_cast<double>(intervals_);
  }

 private:
  std::size_t intervals_ = 0;
};

struct CostCurve {
  std::vector<double> angles_deg;
  std::vector<double> costs;
};

struct AoaEstimate {
  double theta_hat_deg = 0.0;
  double cost_at_min = 0.0;
  cdouble gain_hat{0.0, 0.0};
};

/// Full-grid objective, evaluated through the direct residual route.
inline CostCurve cost_curve(const ProbeSchedule& schedule,
                            const BeamObservation& obs,
                            std::span<const cdouble> pilots,
                            double grid_step_deg) {
  if (obs.samples.size() != schedule.size())
    throw SimulationError("cost_curve: observation length does not match schedule");
  const AngleGrid grid(grid_step_deg);
  CostCurve curve;
  curve.angles_deg.resize(grid.size());
  curve.costs.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double th = grid.angle(k);
    curve.angles_deg[k] = th;
    curve.costs[k] = residual_cost(model_response(schedule, th, pilots), obs.samples);
  }
  return curve;
}

inline void write_cost_curve_csv(std::ostream& os, const CostCurve& curve) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << "angle_deg,cost\n";
  os.precision(17);
  for (std::size_t k = 0; k < curve.costs.size(); ++k)
    os << curve.angles_deg[k] << ',' << curve.costs[k] << '\n';
  os.flags(old_flags);
  os.precision(old_prec);
}

/// Reusable estimator for one (schedule, pilot) pair.
///
/// Grid costs come from the identity z^H y = a(theta)^H b with
/// b_n = sum_t [w_t]_n conj(s_t) y_t, so each grid point costs N complex
/// multiplies after an O(NT) setup. The search scans a ~0.25 deg coarse
/// subgrid and densely rescans +-1 coarse step around every coarse local
/// minimum; features of the cost curve are several degrees wide for any
/// practical N, so this returns the full-grid argmin (checked in tests
/// against SearchMode::exhaustive).
class AoaEstimator {
 public:
  enum class SearchMode { coarse_to_fine, exhaustive };

  static constexpr double kCoarseSpacingDeg = 0.25;

  AoaEstimator(const ProbeSchedule& schedule, std::span<const cdouble> pilots,
               double grid_step_deg)
      : schedule_(schedule),
        pilots_(pilots.begin(), pilots.end()),
        grid_(grid_step_deg),
        n_(static_cast<std::size_t>(schedule.num_antennas())) {
    if (pilots_.size() != schedule.size())
      throw SimulationError("AoaEstimator: pilot length does not match schedule");
    const std::size_t g = grid_.size();
    stride_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(kCoarseSpacingDeg / grid_.spacing())));
    for (std::size_t k = 0; k < g; k += stride_) coarse_idx_.push_back(k);
    if (coarse_idx_.back() != g - 1) coarse_idx_.push_back(g - 1);

    full_ = Table(n_, g);
    coarse_ = Table(n_, coarse_idx_.size());
    for (std::size_t k = 0; k < g; ++k) {
      const double u = std::sin(deg_to_rad(grid_.angle(k)));
      for (std::size_t n = 0; n < n_; ++n) {
        const double ph = -std::numbers::pi * static_cast<double>(n + 1) * u;
        full_.re[n * g + k] = std::cos(ph);
        full_.im[n * g + k] = std::sin(ph);
      }
      full_.znorm2[k] = energy(model_response(schedule, grid_.angle(k), pilots_));
    }
    const std::size_t c = coarse_idx_.size();
    for (std::size_t j = 0; j < c; ++j) {
      const std::size_t k = coarse_idx_[j];
      for (std::size_t n = 0; n < n_; ++n) {
        coarse_.re[n * c + j] = full_.re[n * g + k];
        coarse_.im[n * c + j] = full_.im[n * g + k];
      }
      coarse_.znorm2[j] = full_.znorm2[k];
    }
  }

  const AngleGrid& grid() const { return grid_; }

  AoaEstimate estimate(const BeamObservation& obs,
                       SearchMode mode = SearchMode::coarse_to_fine) const {
    const auto& y = obs.samples;
    if (y.size() != schedule_.size())
      throw SimulationError("estimate_aoa: observation length does not match schedule");
    Workspace ws = prepare(y);
    const std::size_t g = grid_.size();
    std::vector<double> cost(g, std::numeric_limits<double>::quiet_NaN());

    if (mode == SearchMode::exhaustive || coarse_idx_.size() < 5) {
      eval_block(ws, full_, 0, g, cost.data());
    } else {
      const std::size_t c = coarse_idx_.size();
      std::vector<double> cc(c);
      eval_block(ws, coarse_, 0, c, cc.data());
      for (std::size_t j = 0; j < c; ++j) cost[coarse_idx_[j]] = cc[j];
      for (std::size_t j = 0; j < c; ++j) {
        const bool left_ok = j == 0 || cc[j] <= cc[j - 1];
        const bool right_ok = j + 1 == c || cc[j] <= cc[j + 1];
        if (!(left_ok && right_ok)) continue;
        const std::size_t lo = coarse_idx_[j == 0 ? 0 : j - 1];
        const std::size_t hi = coarse_idx_[j + 1 == c ? c - 1 : j + 1];
        eval_block(ws, full_, lo, hi + 1, cost.data() + lo);
      }
    }

    // Lowest angle wins ties.
    std::size_t best = g;
    for (std::size_t k = 0; k < g; ++k)
      if (!std::isnan(cost[k]) && (best == g || cost[k] < cost[best])) best = k;
    if (best > 0 && std::isnan(cost[best - 1]))
      eval_block(ws, full_, best - 1, best, &cost[best - 1]);
    if (best + 1 < g && std::isnan(cost[best + 1]))
      eval_block(ws, full_, best + 1, best + 2, &cost[best + 1]);

    return refine(y, cost, best);
  }

  /// Grid cost at index k via the fast identity.
  double grid_cost(const BeamObservation& obs, std::size_t k) const {
    double out = 0.0;
    eval_block(prepare(obs.samples), full_, k, k + 1, &out);
    return out;
  }

 private:
  /// Phase table exp(-j pi n sin(theta_k)), antenna-major so the inner loop
  /// runs over contiguous grid points.
  struct Table {
    Table() = default;
    Table(std::size_t n, std::size_t points)
        : re(n * points), im(n * points), znorm2(points), ld(points) {}
    std::vector<double> re, im, znorm2;
    std::size_t ld = 0;
  };

  struct Workspace {
    std::vector<double> b_re, b_im;
    mutable std::vector<double> acc_re, acc_im;
    double yy = 0.0;
  };

  Workspace prepare(std::span<const cdouble> y) const {
    Workspace ws;
    ws.b_re.assign(n_, 0.0);
    ws.b_im.assign(n_, 0.0);
    ws.yy = energy(y);
    const auto& combs = schedule_.combiners();
    for (std::size_t t = 0; t < y.size(); ++t) {
      const cdouble v = std::conj(pilots_[t]) * y[t];
      for (std::size_t n = 0; n < n_; ++n) {
        const cdouble p = combs[t][n] * v;
        ws.b_re[n] += p.real();
        ws.b_im[n] += p.imag();
      }
    }
    return ws;
  }

  /// Costs for table points [begin, end) written to out[0 .. end-begin).
  void eval_block(const Workspace& ws, const Table& tab, std::size_t begin,
                  std::size_t end, double* out) const {
    const std::size_t len = end - begin;
    ws.acc_re.assign(len, 0.0);
    ws.acc_im.assign(len, 0.0);
    double* pr = ws.acc_re.data();
    double* pi = ws.acc_im.data();
    for (std::size_t n = 0; n < n_; ++n) {
      const double br = ws.b_re[n];
      const double bi = ws.b_im[n];
      const double* er = tab.re.data() + n * tab.ld + begin;
      const double* ei = tab.im.data() + n * tab.ld + begin;
      for (std::size_t k = 0; k < len; ++k) {
        pr[k] += er[k] * br - ei[k] * bi;
        pi[k] += er[k] * bi + ei[k] * br;
      }
    }
    const double* zz = tab.znorm2.data() + begin;
    for (std::size_t k = 0; k < len; ++k) {
      const double fit = zz[k] > 0.0 ? (pr[k] * pr[k] + pi[k] * pi[k]) / zz[k] : 0.0;
      out[k] = std::max(0.0, ws.yy - fit);
    }
  }

  AoaEstimate refine(std::span<const cdouble> y, const std::vector<double>& cost,
                     std::size_t best) const {
    const std::size_t g = grid_.size();
    double theta = grid_.angle(best);
    if (best > 0 && best + 1 < g) {
      const double cm = cost[best - 1], c0 = cost[best], cp = cost[best + 1];
      const double curvature = cm - 2.0 * c0 + cp;
      if (curvature > 0.0) {
        const double offset = std::clamp(0.5 * (cm - cp) / curvature, -0.5, 0.5);
        theta += offset * grid_.spacing();
      }
    }
    auto z = model_response(schedule_, theta, pilots_);
    double c = residual_cost(z, y);
    const double theta_grid = grid_.angle(best);
    if (theta != theta_grid) {
      auto zg = model_response(schedule_, theta_grid, pilots_);
      const double cg = residual_cost(zg, y);
      if (cg < c) {
        theta = theta_grid;
        c = cg;
        z = std::move(zg);
      }
    }
    return AoaEstimate{theta, c, gain_hat(z, y)};
  }

  ProbeSchedule schedule_;
  CVector pilots_;
  AngleGrid grid_;
  std::size_t n_;
  std::size_t stride_ = 1;
  std::vector<std::size_t> coarse_idx_;
  Table full_, coarse_;
};

/// One-shot grid argmin plus parabolic refinement.
inline AoaEstimate estimate_aoa(const ProbeSchedule& schedule,
                                const BeamObservation& obs,
                                std::span<const cdouble> pilots,
                                double grid_step_deg) {
  return AoaEstimator(schedule, pilots, grid_step_deg).estimate(obs);
}

}  // namespace aoa_auth
