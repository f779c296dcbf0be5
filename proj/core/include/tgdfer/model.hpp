#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tgdfer/config.hpp"
#include "tgdfer/mil_head.hpp"
#include "tgdfer/prompt_fusion.hpp"
#include "tgdfer/temporal_net.hpp"

namespace tgdfer {

struct ModelOutput {
    InstanceFeatures instance;
    EnhancedLabelMatrix labels;
    BagPrediction prediction;
};

// Full pipeline: frame features -> temporal net -> prompt fusion -> MIL head.
// Initial parameters depend only on config.seed.
class TgdferModel {
public:
    TgdferModel(const TrainConfig& config, std::size_t feature_dim, std::vector<std::string> class_names,
                std::vector<std::string> descriptors);
    // Parameters are shared handles; a copy would alias them.
    TgdferModel(const TgdferModel&) = delete;
    TgdferModel& operator=(const TgdferModel&) = delete;
    TgdferModel(TgdferModel&&) = default;

    ModelOutput forward(const Tensor& features) const;
    Tensor loss(const ModelOutput& output, std::size_t label) const { return bag_loss(output.prediction, label); }

    ParameterSet& parameters() { return params_; }
    const ParameterSet& parameters() const { return params_; }
    const TemporalNet& temporal() const { return temporal_; }
    const PromptFusion& prompts() const { return prompts_; }
    const TrainConfig& config() const { return config_; }
    std::size_t feature_dim() const { return feature_dim_; }
    std::size_t class_count() const { return class_names_.size(); }
    const std::vector<std::string>& class_names() const { return class_names_; }
    const std::vector<std::string>& descriptors() const { return descriptors_; }
    // Same inputs as DatasetManifest::schema_hash.
    std::uint64_t schema_hash() const;
    std::uint64_t frozen_checksum() const { return text_encoder_->checksum(); }

private:
    static TemporalNet make_temporal(const TrainConfig& config, std::size_t feature_dim, Rng& rng);

    TrainConfig config_;
    std::size_t feature_dim_;
    std::vector<std::string> class_names_;
    std::vector<std::string> descriptors_;
    std::shared_ptr<const FrozenTextEncoder> text_encoder_;
    Rng init_rng_;
    TemporalNet temporal_;
    PromptFusion prompts_;
    ParameterSet params_;
};

}  // namespace tgdfer
