#pragma once

// Seeded sampling helpers shared by construction, probes and experiments.

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cpa/numerics.hpp"

namespace cpa {

using Rng = std::mt19937_64;

/// Mixes a base seed with a list of coordinates (splitmix64 finalizer per
/// step). Parallel callers derive per-task seeds from this so scheduling
/// never changes results.
std::uint64_t sub_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

/// Uniform sample from the closed unit disk.
CScalar sample_unit_disk(Rng& rng);

/// K points uniform in the unit disk, rejecting any draw closer than
/// `min_separation` to an earlier point.
CVector sample_generic_points(std::size_t count, Rng& rng, double min_separation = 1e-3);

/// Nonzero weights with magnitude in [0.5, 1.5] and uniform phase.
CVector sample_weights(std::size_t count, Rng& rng);

/// Complex vector with independent standard normal real and imaginary parts.
CVector sample_gaussian(std::size_t count, Rng& rng);

}  // namespace cpa
