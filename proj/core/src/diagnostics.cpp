#include "tgdfer/diagnostics.hpp"

#include <random>

#include "tgdfer/model.hpp"
#include "tgdfer/ops.hpp"
#include "tgdfer/random.hpp"

namespace tgdfer {

namespace {

constexpr std::size_t kFrames = 6;
constexpr std::size_t kDim = 8;

TrainConfig suite_config(std::uint64_t seed) {
    TrainConfig config;
    config.seed = seed;
    config.temporal.dim = kDim;
    config.temporal.fine_depth = 1;
    config.temporal.coarse_depth = 1;
    config.temporal.segmentation = {3, 1, true};
    config.temporal.max_frames = kFrames;
    config.prompt.visual_prompt = VisualPromptMode::add;
    config.prompt.learnable_context = true;
    config.text_encoder.token_dim = kDim;
    return config;
}

void redraw(ParameterSet& params, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const auto& p : params) {
        const bool gain = p.name.ends_with("gain");
        Tensor handle = p.tensor;
        for (auto& v : handle.mutable_values()) v = gain ? 1.0 + 0.2 * gauss(rng) : 0.3 * gauss(rng);
    }
}

Tensor unit_rows(Rng& rng, std::size_t rows, std::size_t cols) { return l2_normalize(normal_tensor(rng, {rows, cols}, 1.0)); }

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(bool full_pipeline, std::uint64_t seed) {
    const std::vector<std::string> names{"happiness", "sadness", "anger"};
    const std::vector<std::string> descriptors{"a smiling mouth, raised cheeks", "drooping eyelids, lowered lips",
                                               "lowered brows, tightened lips"};
    TgdferModel model(suite_config(seed), kDim, names, descriptors);
    Rng rng = make_rng(seed, 0x67636b);
    redraw(model.parameters(), rng);
    const Tensor features = unit_rows(rng, kFrames, kDim);
    const std::size_t label = 1;

    std::vector<GradCheckCase> out;
    if (full_pipeline) {
        auto loss = [&] { return model.loss(model.forward(features), label); };
        out.push_back({"full_pipeline", check_gradients(loss, model.parameters())});
        return out;
    }

    ParameterSet temporal_params, head_params;
    for (const auto& p : model.parameters()) {
        (p.group == ParamGroup::temporal ? temporal_params : head_params).add(p.name, p.tensor, p.group);
    }

    const Tensor probe = normal_tensor(rng, {kFrames, kDim}, 1.0);
    auto temporal_loss = [&] { return sum(mul(model.temporal().forward(features).x_instance, probe)); };
    out.push_back({"temporal_net", check_gradients(temporal_loss, temporal_params)});

    const Tensor instance = unit_rows(rng, kFrames, kDim);
    auto head_loss = [&] {
        const auto labels = model.prompts().forward(instance, model.config().tau_a);
        return bag_loss(predict_bag(instance, labels.x_tilde, model.config().tau_p), label);
    };
    out.push_back({"prompt_fusion_head", check_gradients(head_loss, head_params)});
    return out;
}

}  // namespace tgdfer
