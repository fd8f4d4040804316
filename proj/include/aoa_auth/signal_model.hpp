#pragma once

// Analog-array receive model: a single RF chain behind an N-element
// uniform linear array (half-wavelength spacing) that sweeps T directional
// combiners, one per pilot slot.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aoa_auth/errors.hpp"

namespace aoa_auth {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;
using Rng = std::mt19937_64;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline double dbm_to_watts(double dbm) {
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

struct ArrayConfig {
  int num_antennas = 16;
  double carrier_freq_hz = 2.5e9;
  double bandwidth_hz = 20e6;
  double noise_psd_dbm_hz = -174.0;
  double tx_power_dbm = 10.0;  // -inf means the transmitter is silent

  double wavelength_m() const { return kSpeedOfLight / carrier_freq_hz; }
  double tx_power_watts() const { return dbm_to_watts(tx_power_dbm); }

  void validate() const {
    if (num_antennas <= 1)
      throw ConfigError("num_antennas (N): must be > 1, got " +
                        std::to_string(num_antennas));
    if (!(carrier_freq_hz > 0.0))
      throw ConfigError("carrier_freq_hz: must be > 0");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz: must be > 0");
    if (std::isnan(noise_psd_dbm_hz) || std::isinf(noise_psd_dbm_hz))
      throw ConfigError("noise_psd_dbm_hz: must be finite");
    if (std::isnan(tx_power_dbm) || tx_power_dbm == HUGE_VAL)
      throw ConfigError("tx_power_dbm: must be finite or -inf");
  }
};

struct NodeGeometry {
  double distance_m = 10.0;
  double aoa_deg = 0.0;
};

/// Entry n (1-indexed) is exp(j*pi*n*sin(theta)).
inline CVector steering_vector(double aoa_deg, int n_antennas) {
  if (n_antennas < 1)
    throw SimulationError("steering_vector: n_antennas must be >= 1");
  const double u = std::sin(deg_to_rad(aoa_deg));
  CVector a(static_cast<std::size_t>(n_antennas));
  for (int n = 1; n <= n_antennas; ++n)
    a[static_cast<std::size_t>(n - 1)] = std::polar(1.0, std::numbers::pi * n * u);
  return a;
}

/// w^H v for equal-length complex vectors.
inline cdouble inner_product(std::span<const cdouble> w,
                             std::span<const cdouble> v) {
  if (w.size() != v.size())
    throw SimulationError("inner_product: length mismatch (" +
                          std::to_string(w.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  cdouble acc{0.0, 0.0};
  for (std::size_t i = 0; i < w.size(); ++i) acc += std::conj(w[i]) * v[i];
  return acc;
}

/// w^H a(theta), with a(theta) of the combiner's length.
inline cdouble beam_gain(std::span<const cdouble> combiner, double aoa_deg) {
  const auto a = steering_vector(aoa_deg, static_cast<int>(combiner.size()));
  return inner_product(combiner, a);
}

/// Free-space amplitude lambda / (4 pi d).
inline double channel_amplitude(double distance_m, double carrier_freq_hz) {
  if (!(distance_m > 0.0))
    throw SimulationError("channel_amplitude: distance must be > 0, got " +
                          std::to_string(distance_m));
  if (!(carrier_freq_hz > 0.0))
    throw SimulationError("channel_amplitude: carrier frequency must be > 0");
  const double lambda = kSpeedOfLight / carrier_freq_hz;
  return lambda / (4.0 * std::numbers::pi * distance_m);
}

/// sigma^2 = N0 * W in watts.
inline double noise_variance(const ArrayConfig& config) {
  return dbm_to_watts(config.noise_psd_dbm_hz) * config.bandwidth_hz;
}

/// The verifier's sequence of directional combiners w_t = a(theta_t).
class ProbeSchedule {
 public:
  ProbeSchedule() = default;

  /// Builds combiners from probe angles; T >= 1 here, T > 1 is a scenario
  /// constraint enforced by config validation.
  ProbeSchedule(std::vector<double> probe_angles_deg, int n_antennas)
      : angles_(std::move(probe_angles_deg)), n_(n_antennas) {
    if (angles_.empty())
      throw SimulationError("ProbeSchedule: at least one probe is required");
    if (n_antennas < 1)
      throw SimulationError("ProbeSchedule: n_antennas must be >= 1");
    combiners_.reserve(angles_.size());
    for (double th : angles_) {
      if (!(th >= -90.0 && th <= 90.0))
        throw SimulationError("ProbeSchedule: probe angle outside [-90, 90]: " +
                              std::to_string(th));
      combiners_.push_back(steering_vector(th, n_antennas));
    }
  }

  /// T angles evenly spaced over [lo, hi], endpoints included.
  static ProbeSchedule uniform(int num_probes, int n_antennas,
                               double lo_deg = -90.0, double hi_deg = 90.0) {
    if (num_probes < 1)
      throw SimulationError("ProbeSchedule::uniform: num_probes must be >= 1");
    std::vector<double> angles(static_cast<std::size_t>(num_probes));
    if (num_probes == 1) {
      angles[0] = 0.5 * (lo_deg + hi_deg);
    } else {
      const double span = hi_deg - lo_deg;
      for (int t = 0; t < num_probes; ++t)
        angles[static_cast<std::size_t>(t)] =
            lo_deg + span * static_cast<double>(t) / (num_probes - 1);
    }
    return ProbeSchedule(std::move(angles), n_antennas);
  }

  std::size_t size() const { return angles_.size(); }
  int num_antennas() const { return n_; }
  const std::vector<double>& probe_angles_deg() const { return angles_; }
  const std::vector<CVector>& combiners() const { return combiners_; }
  std::span<const cdouble> combiner(std::size_t t) const { return combiners_[t]; }

  /// [w_t^H a(theta)]_t for all t.
  CVector beam_gains(double aoa_deg) const {
    const auto a = steering_vector(aoa_deg, n_);
    CVector g(size());
    for (std::size_t t = 0; t < size(); ++t) g[t] = inner_product(combiners_[t], a);
    return g;
  }

 private:
  std::vector<double> angles_;
  std::vector<CVector> combiners_;
  int n_ = 0;
};

inline double energy(std::span<const cdouble> v) {
  double e = 0.0;
  for (const auto& x : v) e += std::norm(x);
  return e;
}

/// T complex transmit symbols with unit total energy.
class PilotSequence {
 public:
  static constexpr double kEnergyTolerance = 1e-12;

  PilotSequence() = default;
  explicit PilotSequence(CVector symbols) : symbols_(std::move(symbols)) {
    const double e = energy(symbols_);
    if (std::abs(e - 1.0) > kEnergyTolerance)
      throw SimulationError("PilotSequence: energy must be 1, got " +
                            std::to_string(e));
  }

  /// s_t = 1/sqrt(T) for every slot.
  static PilotSequence constant(std::size_t t_len) {
    if (t_len == 0) throw SimulationError("PilotSequence: empty sequence");
    return PilotSequence(
        CVector(t_len, cdouble(1.0 / std::sqrt(static_cast<double>(t_len)), 0.0)));
  }

  std::size_t size() const { return symbols_.size(); }
  const CVector& symbols() const { return symbols_; }
  operator std::span<const cdouble>() const { return symbols_; }

 private:
  CVector symbols_;
};

/// Received samples y_1..y_T at the verifier, in probe order.
struct BeamObservation {
  CVector samples;
};

/// y_t = sqrt(P) |h| e^{j phase} (w_t^H a(theta)) s_t + n_t.
/// Noise is circular complex Gaussian with sigma^2/2 per real dimension,
/// drawn from `noise` in slot order; a null `noise` gives the noiseless
/// response.
inline BeamObservation synthesize_observation(const ProbeSchedule& schedule,
                                              const NodeGeometry& geometry,
                                              std::span<const cdouble> pilots,
                                              double channel_phase_rad,
                                              const ArrayConfig& config,
                                              Rng* noise) {
  if (pilots.size() != schedule.size())
    throw SimulationError("synthesize_observation: pilot length " +
                          std::to_string(pilots.size()) +
                          " does not match schedule length " +
                          std::to_string(schedule.size()));
  const double amp = std::sqrt(config.tx_power_watts()) *
                     channel_amplitude(geometry.distance_m, config.carrier_freq_hz);
  const cdouble h = std::polar(amp, channel_phase_rad);
  const auto gains = schedule.beam_gains(geometry.aoa_deg);

  BeamObservation obs;
  obs.samples.resize(schedule.size());
  for (std::size_t t = 0; t < schedule.size(); ++t)
    obs.samples[t] = h * gains[t] * pilots[t];

  if (noise != nullptr) {
    std::normal_distribution<double> gauss(0.0,
                                           std::sqrt(noise_variance(config) / 2.0));
    for (auto& y : obs.samples) {
      const double re = gauss(*noise);
      const double im = gauss(*noise);
      y += cdouble(re, im);
    }
  }
  return obs;
}

}  // namespace aoa_auth
