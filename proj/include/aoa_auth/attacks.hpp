#pragma once

// Eve's precoded pilot sequences. Every constructor returns a sequence of
// unit total energy; the normalization actually applied is reported back
// through AttackContext::normalization.

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "aoa_auth/signal_model.hpp"

namespace aoa_auth {

enum class AttackKind { None, Random, CodeBased, LocationBased };

inline std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::None: return "none";
    case AttackKind::Random: return "random";
    case AttackKind::CodeBased: return "code";
    case AttackKind::LocationBased: return "location";
  }
  return "?";
}

inline std::optional<AttackKind> parse_attack_kind(std::string_view s) {
  if (s == "none") return AttackKind::None;
  if (s == "random") return AttackKind::Random;
  if (s == "code" || s == "cba" || s == "code-based") return AttackKind::CodeBased;
  if (s == "location" || s == "lba" || s == "location-based")
    return AttackKind::LocationBased;
  return std::nullopt;
}

struct AttackContext {
  const ProbeSchedule* schedule = nullptr;
  const PilotSequence* alice_pilots = nullptr;
  double target_aoa_deg = 0.0;
  std::optional<double> eve_aoa_deg;
  double normalization = 0.0;  // alpha^E, written by the attack
};

/// Threshold on |w_t^H a(theta_E)|^2 below which a probe counts as a null
/// of Eve's beam response.
inline double null_floor(int n_antennas) {
  const double n = static_cast<double>(n_antennas);
  return 1e-12 * n * n;
}

/// s_t = exp(j phi_t) / sqrt(T), phi_t ~ U[0, 2pi).
inline PilotSequence random_attack(std::size_t t_len, Rng& rng) {
  if (t_len == 0) throw SimulationError("random_attack: t_len must be >= 1");
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double mag = 1.0 / std::sqrt(static_cast<double>(t_len));
  CVector s(t_len);
  for (auto& x : s) x = std::polar(mag, phase(rng));
  // Summing T terms of 1/T can miss 1 by a few ulps; rescale to the exact
  // energy so the PilotSequence invariant holds regardless of T.
  const double e = energy(s);
  for (auto& x : s) x /= std::sqrt(e);
  return PilotSequence(std::move(s));
}

namespace detail {

inline void require_context(const AttackContext& ctx, const char* who) {
  if (ctx.schedule == nullptr || ctx.alice_pilots == nullptr)
    throw SimulationError(std::string(who) +
                          ": schedule and Alice's pilots are required");
  if (ctx.alice_pilots->size() != ctx.schedule->size())
    throw SimulationError(std::string(who) +
                          ": pilot length does not match schedule length");
}

/// Sequences whose energy is below null_floor(N) only carry rounding
/// residue of exact beam nulls and are treated as zero.
inline PilotSequence normalize(CVector raw, AttackContext& ctx, const char* who) {
  const double e = energy(raw);
  if (!(e >= null_floor(ctx.schedule->num_antennas())) || !std::isfinite(e))
    throw SimulationError(std::string(who) +
                          ": degenerate sequence, cannot normalize to unit energy");
  ctx.normalization = 1.0 / std::sqrt(e);
  for (auto& x : raw) x *= ctx.normalization;
  return PilotSequence(std::move(raw));
}

}  // namespace detail

/// s_t = alpha * (w_t^H a(theta_A)) * s_t^A.
inline PilotSequence code_based_attack(AttackContext& ctx) {
  detail::require_context(ctx, "code_based_attack");
  const auto gains = ctx.schedule->beam_gains(ctx.target_aoa_deg);
  const auto& sa = ctx.alice_pilots->symbols();
  CVector raw(gains.size());
  for (std::size_t t = 0; t < raw.size(); ++t) raw[t] = gains[t] * sa[t];
  return detail::normalize(std::move(raw), ctx, "code_based_attack");
}

/// s_t = alpha * (w_t^H a(theta_A)) (w_t^H a(theta_E))^* / |w_t^H a(theta_E)|^2 * s_t^A.
///
/// On probes where |w_t^H a(theta_E)|^2 falls below null_floor(N) the inverse
/// gain magnitude is capped at 1/sqrt(floor). Eve then spends nearly all of
/// her energy on the null probe, alpha collapses toward 0 and the attack
/// fails instead of producing non-finite symbols.
inline PilotSequence location_based_attack(AttackContext& ctx) {
  detail::require_context(ctx, "location_based_attack");
  if (!ctx.eve_aoa_deg)
    throw SimulationError("location_based_attack: Eve's AoA is required");
  const auto ga = ctx.schedule->beam_gains(ctx.target_aoa_deg);
  const auto ge = ctx.schedule->beam_gains(*ctx.eve_aoa_deg);
  const auto& sa = ctx.alice_pilots->symbols();
  const double cap = std::sqrt(null_floor(ctx.schedule->num_antennas()));

  CVector raw(ga.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    const double mag = std::abs(ge[t]);
    cdouble inverse;
    if (mag * mag >= cap * cap)
      inverse = std::conj(ge[t]) / (mag * mag);
    else if (mag > 0.0)
      inverse = std::conj(ge[t]) / (mag * cap);
    else
      inverse = cdouble(1.0 / cap, 0.0);
    raw[t] = ga[t] * inverse * sa[t];
  }
  return detail::normalize(std::move(raw), ctx, "location_based_attack");
}

/// Dispatch on kind. Random draws from `rng`; None returns Alice's pilots.
inline PilotSequence make_attack_pilots(AttackKind kind, AttackContext& ctx,
                                        Rng& rng) {
  switch (kind) {
    case AttackKind::None:
      detail::require_context(ctx, "make_attack_pilots");
      ctx.normalization = 1.0;
      return *ctx.alice_pilots;
    case AttackKind::Random:
      detail::require_context(ctx, "make_attack_pilots");
      ctx.normalization = 1.0;
      return random_attack(ctx.schedule->size(), rng);
    case AttackKind::CodeBased:
      return code_based_attack(ctx);
    case AttackKind::LocationBased:
      return location_based_attack(ctx);
  }
  throw SimulationError("make_attack_pilots: unknown attack kind");
}

}  // namespace aoa_auth
