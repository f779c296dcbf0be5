#include "tgdfer/model.hpp"

#include "tgdfer/manifest.hpp"

namespace tgdfer {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;

std::shared_ptr<const FrozenTextEncoder> make_text_encoder(const TrainConfig& config, std::size_t feature_dim) {
    TextEncoderConfig enc = config.text_encoder;
    enc.output_dim = feature_dim;
    if (enc.token_dim == 0) enc.token_dim = feature_dim;
    return std::make_shared<const FrozenTextEncoder>(enc);
}

const TrainConfig& validated(const TrainConfig& config) {
    config.validate();
    return config;
}

}  // namespace

TemporalNet TgdferModel::make_temporal(const TrainConfig& config, std::size_t feature_dim, Rng& rng) {
    TemporalNetConfig tc = config.temporal;
    tc.dim = feature_dim;
    return TemporalNet(tc, rng);
}

TgdferModel::TgdferModel(const TrainConfig& config, std::size_t feature_dim, std::vector<std::string> class_names,
                         std::vector<std::string> descriptors)
    : config_(validated(config)),
      feature_dim_(feature_dim),
      class_names_(std::move(class_names)),
      descriptors_(std::move(descriptors)),
      text_encoder_(make_text_encoder(config, feature_dim)),
      init_rng_(make_rng(config.seed, kInitStream)),
      temporal_(make_temporal(config, feature_dim, init_rng_)),
      prompts_(config.prompt, text_encoder_, class_names_, descriptors_, init_rng_) {
    temporal_.register_parameters(params_);
    prompts_.register_parameters(params_);
}

ModelOutput TgdferModel::forward(const Tensor& features) const {
    ModelOutput out;
    out.instance = temporal_.forward(features);
    out.labels = prompts_.forward(out.instance.x_instance, config_.tau_a);
    out.prediction =
        predict_bag(out.instance.x_instance, out.labels.x_tilde, config_.tau_p, config_.aggregation, config_.topk);
    return out;
}

std::uint64_t TgdferModel::schema_hash() const {
    DatasetManifest schema;
    schema.feature_dim = feature_dim_;
    schema.class_count = class_names_.size();
    schema.class_names = class_names_;
    return schema.schema_hash();
}

}  // namespace tgdfer
