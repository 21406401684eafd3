// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace autoscale {

/// Independent random streams derived from one run seed. Each consumer draws
/// from its own stream, so results do not depend on the order in which
/// consumers run.
enum class SeedStream : std::uint64_t {
  ProblemInit = 1,
  Dataset = 2,
  WeightSampling = 3,
  RandomWeighting = 4,
  GradientNoise = 5,
  SolverRestarts = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based split: a distinct 64-bit seed for (seed, stream, counter).
constexpr std::uint64_t split_seed(std::uint64_t seed, SeedStream stream,
                                   std::uint64_t counter = 0) {
  return mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(stream))) + counter);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, SeedStream stream, std::uint64_t counter = 0) {
  return std::mt19937_64(split_seed(seed, stream, counter));
}

}  // namespace autoscale
