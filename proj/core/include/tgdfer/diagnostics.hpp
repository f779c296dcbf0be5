#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgdfer/gradcheck.hpp"

namespace tgdfer {

struct GradCheckCase {
    std::string name;
    GradCheckReport report;
};

// Small fixed problem: T=6, d=8, C=3, one fine and one coarse layer, window 3,
// stride 1, additive visual prompt, learnable context. Parameters are
// re-drawn at a scale where every path carries gradient (the default init
// zeroes residual output maps). Without `full_pipeline` the temporal net and
// the prompt-fusion head are checked separately.
std::vector<GradCheckCase> run_gradcheck_suite(bool full_pipeline, std::uint64_t seed = 7);

}  // namespace tgdfer
