#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include "aoa_auth/errors.hpp"

namespace aoa_auth {

/// Positive class = Alice accepted.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fn += o.fn;
    fp += o.fp;
    tn += o.tn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) {
    return a += b;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;

  void record_legitimate(bool accepted) { accepted ? ++tp : ++fn; }
  void record_attack(bool accepted) { accepted ? ++fp : ++tn; }
  std::uint64_t total() const { return tp + fn + fp + tn; }
};

/// FN / (TP + FN).
inline double p_fa(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw SimulationError("p_fa: no legitimate samples");
  return static_cast<double>(c.fn) / static_cast<double>(c.tp + c.fn);
}

/// FP / (FP + TN).
inline double p_md(const ConfusionCounts& c) {
  if (c.fp + c.tn == 0) throw SimulationError("p_md: no attack samples");
  return static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
}

inline double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw SimulationError("accuracy: no samples");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// Root-mean-square deviation from a fixed reference angle.
inline double rmse(std::span<const double> estimates_deg, double reference_deg) {
  if (estimates_deg.empty()) throw SimulationError("rmse: no estimates");
  double s = 0.0;
  for (double e : estimates_deg) {
    const double d = e - reference_deg;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(estimates_deg.size()));
}

/// One sweep point of an authentication or RMSE experiment.
struct MetricsRow {
  std::string attack;
  double theta_e_deg = 0.0;
  double d_e_m = 0.0;
  std::uint64_t trials = 0;
  double p_fa = 0.0;
  double p_md = 0.0;
  double accuracy = 0.0;
  double rmse_deg = 0.0;
};

inline constexpr const char* kMetricsCsvHeader =
    "attack,theta_e_deg,d_e_m,trials,p_fa,p_md,accuracy,rmse_deg";

inline void write_metrics_row(std::ostream& os, const MetricsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%llu,%.10g,%.10g,%.10g,%.10g\n",
                r.attack.c_str(), r.theta_e_deg, r.d_e_m,
                static_cast<unsigned long long>(r.trials), r.p_fa, r.p_md,
                r.accuracy, r.rmse_deg);
  os << buf;
}

}  // namespace aoa_auth
