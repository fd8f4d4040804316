#pragma once

#include <cstdint>
#include <initializer_list>

#include "aoa_auth/signal_model.hpp"

namespace aoa_auth {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive hash of (master_seed, labels...). Each label passes
/// through a full splitmix64 round, so (1, 2) and (2, 1) differ.
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::initializer_list<std::uint64_t> labels) {
  std::uint64_t h = splitmix64(master_seed);
  for (auto l : labels) h = splitmix64(h ^ splitmix64(l + 0x632be59bd9b4e019ULL));
  return h;
}

/// Independent stream for one unit of Monte-Carlo work, identified by
/// (experiment, sweep point, repetition, trial, role) or any other label
/// tuple. Identical labels give identical streams irrespective of which
/// worker runs them.
template <typename... Labels>
Rng derive_trial_rng(std::uint64_t master_seed, Labels... labels) {
  return Rng(derive_seed(master_seed, {static_cast<std::uint64_t>(labels)...}));
}

}  // namespace aoa_auth
