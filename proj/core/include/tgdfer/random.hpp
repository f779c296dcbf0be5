#pragma once

#include <cstdint>
#include <random>

#include "tgdfer/tensor.hpp"

namespace tgdfer {

using Rng = std::mt19937_64;

// Independent generator for (seed, stream); streams keep e.g. parameter
// init and data shuffling from perturbing each other.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

Tensor normal_tensor(Rng& rng, Shape shape, double stddev, bool requires_grad = false);
// Normal draws resampled until they fall inside ±2 stddev.
Tensor truncated_normal_tensor(Rng& rng, Shape shape, double stddev, bool requires_grad = false);

}  // namespace tgdfer
