#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace ioc {

/// The single random engine used everywhere. Every run owns one, seeded from
/// the run seed, so trajectories replay exactly.
using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) built from the top 53 bits of one engine output.
/// Unlike std::uniform_real_distribution this is identical across standard
/// library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). One engine call per draw.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

/// Inverse-CDF categorical sample with exactly one engine call. Entries with
/// zero probability are never returned.
inline int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = uniform01(rng) * probs.sum();
  double acc = 0.0;
  int last_positive = -1;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += probs[i];
    if (u < acc) return last_positive;
  }
  return last_positive;
}

}  // namespace ioc
