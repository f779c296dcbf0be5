#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgdfer/encoders.hpp"
#include "tgdfer/mil_head.hpp"
#include "tgdfer/optim.hpp"
#include "tgdfer/prompt_fusion.hpp"
#include "tgdfer/temporal_net.hpp"

namespace tgdfer {

struct LearningRates {
    double temporal = 1e-2;
    double prompts = 1e-3;
    double head = 1e-2;
};

struct TrainConfig {
    std::uint64_t seed = 0;
    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    LearningRates lr;
    std::vector<std::size_t> milestones{30, 40};
    double gamma = 0.1;
    double tau_a = 0.01;
    double tau_p = 0.01;
    TemporalNetConfig temporal;  // temporal.dim is taken from the manifest
    PromptConfig prompt;
    Aggregation aggregation = Aggregation::mean;
    std::size_t topk = 2;
    // output_dim is taken from the manifest; token_dim 0 follows it too.
    TextEncoderConfig text_encoder{.token_dim = 0};

    void validate() const;
    nlohmann::json to_json() const;
    // Absent keys keep their defaults; unknown keys are rejected.
    static TrainConfig from_json(const nlohmann::json& doc);
    static TrainConfig load(const std::filesystem::path& path);
    std::uint64_t hash() const;
};

// base rate × gamma^(number of milestones <= epoch), per parameter group.
GroupRates lr_at(std::size_t epoch, const TrainConfig& config);

std::uint64_t fnv1a_text(std::string_view text);

}  // namespace tgdfer
