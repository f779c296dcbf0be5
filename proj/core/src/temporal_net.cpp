#include "tgdfer/temporal_net.hpp"

#include <string>

#include "tgdfer/errors.hpp"

namespace tgdfer {

namespace {

constexpr double kInitStd = 0.02;

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return add_bias(matmul(x, w), b); }

}  // namespace

void SegmentationConfig::validate(std::size_t frames) const {
    if (stride == 0 || window == 0) throw ConfigError("segmentation: window and stride must be at least 1");
    if (stride > window) {
        throw ConfigError("segmentation: stride " + std::to_string(stride) + " exceeds window " +
                          std::to_string(window));
    }
    if (window > frames) {
        throw ShapeError("segmentation: window " + std::to_string(window) + " is larger than the bag (" +
                         std::to_string(frames) + " frames)");
    }
}

std::vector<std::size_t> segment_starts(std::size_t frames, const SegmentationConfig& cfg) {
    cfg.validate(frames);
    const std::size_t count = (frames - cfg.window) / cfg.stride + 1;
    std::vector<std::size_t> starts(count);
    for (std::size_t i = 0; i < count; ++i) starts[i] = i * cfg.stride;
    const std::size_t last_covered = starts.back() + cfg.window - 1;
    if (cfg.cover_tail && last_covered < frames - 1) starts.push_back(frames - cfg.window);
    return starts;
}

std::vector<std::size_t> coverage_counts(std::size_t frames, const SegmentationConfig& cfg) {
    std::vector<std::size_t> counts(frames, 0);
    for (auto start : segment_starts(frames, cfg))
        for (std::size_t t = start; t < start + cfg.window; ++t) ++counts[t];
    return counts;
}

Segments segment(const Tensor& features, const SegmentationConfig& cfg) {
    if (features.rank() != 2) throw ShapeError("segment: features must be [T x d]");
    Segments out;
    out.starts = segment_starts(features.dim(0), cfg);
    for (auto start : out.starts) out.windows.push_back(slice_rows(features, start, cfg.window));
    return out;
}

EncoderLayerParams EncoderLayerParams::init(Rng& rng, std::size_t dim, std::size_t ffn_mult) {
    const std::size_t hidden = dim * ffn_mult;
    EncoderLayerParams p;
    p.ln1_gain = Tensor::full({dim}, 1.0, true);
    p.ln1_bias = Tensor::zeros({dim}, true);
    p.wq = truncated_normal_tensor(rng, {dim, dim}, kInitStd, true);
    p.bq = Tensor::zeros({dim}, true);
    p.wk = truncated_normal_tensor(rng, {dim, dim}, kInitStd, true);
    p.bk = Tensor::zeros({dim}, true);
    p.wv = truncated_normal_tensor(rng, {dim, dim}, kInitStd, true);
    p.bv = Tensor::zeros({dim}, true);
    p.wo = Tensor::zeros({dim, dim}, true);
    p.bo = Tensor::zeros({dim}, true);
    p.ln2_gain = Tensor::full({dim}, 1.0, true);
    p.ln2_bias = Tensor::zeros({dim}, true);
    p.w1 = truncated_normal_tensor(rng, {dim, hidden}, kInitStd, true);
    p.b1 = Tensor::zeros({hidden}, true);
    p.w2 = Tensor::zeros({hidden, dim}, true);
    p.b2 = Tensor::zeros({dim}, true);
    return p;
}

void EncoderLayerParams::register_into(ParameterSet& params, const std::string& prefix, ParamGroup group) const {
    params.add(prefix + ".ln1.gain", ln1_gain, group);
    params.add(prefix + ".ln1.bias", ln1_bias, group);
    params.add(prefix + ".attn.wq", wq, group);
    params.add(prefix + ".attn.bq", bq, group);
    params.add(prefix + ".attn.wk", wk, group);
    params.add(prefix + ".attn.bk", bk, group);
    params.add(prefix + ".attn.wv", wv, group);
    params.add(prefix + ".attn.bv", bv, group);
    params.add(prefix + ".attn.wo", wo, group);
    params.add(prefix + ".attn.bo", bo, group);
    params.add(prefix + ".ln2.gain", ln2_gain, group);
    params.add(prefix + ".ln2.bias", ln2_bias, group);
    params.add(prefix + ".ffn.w1", w1, group);
    params.add(prefix + ".ffn.b1", b1, group);
    params.add(prefix + ".ffn.w2", w2, group);
    params.add(prefix + ".ffn.b2", b2, group);
}

Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& layer, const EncoderOptions& options,
                     std::size_t block_len, AttentionTrace* trace) {
    if (x.rank() != 2) throw ShapeError("encoder_layer: input must be [L x d]");
    const std::size_t d = x.dim(1);
    if (options.heads == 0 || d % options.heads != 0) {
        throw ConfigError("encoder_layer: width " + std::to_string(d) + " is not divisible by " +
                          std::to_string(options.heads) + " heads");
    }
    Tensor h = layer_norm(x, layer.ln1_gain, layer.ln1_bias);
    Tensor attended = multi_head_attention(linear(h, layer.wq, layer.bq), linear(h, layer.wk, layer.bk),
                                           linear(h, layer.wv, layer.bv), options.heads, block_len, trace);
    Tensor y = add(x, linear(attended, layer.wo, layer.bo));
    Tensor f = layer_norm(y, layer.ln2_gain, layer.ln2_bias);
    f = linear(activate(linear(f, layer.w1, layer.b1), options.activation), layer.w2, layer.b2);
    return add(y, f);
}

Tensor encoder_stack(const Tensor& x, std::span<const EncoderLayerParams> layers, const EncoderOptions& options,
                     std::size_t block_len) {
    Tensor out = x;
    for (const auto& layer : layers) out = encoder_layer(out, layer, options, block_len);
    return out;
}

TemporalNet::TemporalNet(TemporalNetConfig config, Rng& rng) : config_(config) {
    const std::size_t d = config_.dim;
    if (d == 0) throw ConfigError("temporal net: dimension must be positive");
    if (config_.heads == 0 || d % config_.heads != 0) {
        throw ConfigError("temporal net: width " + std::to_string(d) + " is not divisible by " +
                          std::to_string(config_.heads) + " heads");
    }
    if (config_.segmentation.window == 0 || config_.segmentation.stride == 0 ||
        config_.segmentation.stride > config_.segmentation.window) {
        throw ConfigError("temporal net: need 1 <= stride <= window");
    }
    if (config_.segmentation.window > config_.max_frames) throw ConfigError("temporal net: window exceeds max_frames");
    for (std::size_t i = 0; i < config_.fine_depth; ++i) fine_layers_.push_back(EncoderLayerParams::init(rng, d));
    for (std::size_t i = 0; i < config_.coarse_depth; ++i) coarse_layers_.push_back(EncoderLayerParams::init(rng, d));
    fine_positional_ = truncated_normal_tensor(rng, {config_.segmentation.window, d}, kInitStd, true);
    coarse_positional_ = truncated_normal_tensor(rng, {config_.max_frames, d}, kInitStd, true);
    fusion_weight_ = truncated_normal_tensor(rng, {2 * d, d}, kInitStd, true);
    fusion_bias_ = Tensor::zeros({d}, true);
}

Tensor TemporalNet::fine_forward(const Tensor& features) const {
    if (features.rank() != 2 || features.dim(1) != config_.dim) {
        throw ShapeError("fine_forward: expected [T x " + std::to_string(config_.dim) + "], got " +
                         shape_to_string(features.shape()));
    }
    const std::size_t frames = features.dim(0);
    const auto& seg = config_.segmentation;
    const auto starts = segment_starts(frames, seg);

    std::vector<std::size_t> frame_rows, position_rows;
    frame_rows.reserve(starts.size() * seg.window);
    for (auto start : starts) {
        for (std::size_t i = 0; i < seg.window; ++i) {
            frame_rows.push_back(start + i);
            position_rows.push_back(i);
        }
    }
    Tensor windows = add(gather_rows(features, frame_rows), gather_rows(fine_positional_, position_rows));
    windows = encoder_stack(windows, fine_layers_, encoder_options(), seg.window);

    const auto counts = coverage_counts(frames, seg);
    std::vector<double> inv(frames);
    for (std::size_t t = 0; t < frames; ++t) inv[t] = 1.0 / static_cast<double>(counts[t]);
    return scale_rows(scatter_add_rows(windows, frame_rows, frames), inv);
}

Tensor TemporalNet::coarse_forward(const Tensor& features) const {
    if (features.rank() != 2 || features.dim(1) != config_.dim) {
        throw ShapeError("coarse_forward: expected [T x " + std::to_string(config_.dim) + "], got " +
                         shape_to_string(features.shape()));
    }
    const std::size_t frames = features.dim(0);
    if (frames > config_.max_frames) {
        throw ShapeError("coarse_forward: bag of " + std::to_string(frames) + " frames exceeds max_frames " +
                         std::to_string(config_.max_frames));
    }
    Tensor x = add(features, slice_rows(coarse_positional_, 0, frames));
    return encoder_stack(x, coarse_layers_, encoder_options(), frames);
}

Tensor TemporalNet::fuse(const Tensor& x_fine, const Tensor& x_coarse) const {
    if (x_fine.shape() != x_coarse.shape()) {
        throw ShapeError("fuse: fine " + shape_to_string(x_fine.shape()) + " and coarse " +
                         shape_to_string(x_coarse.shape()) + " differ");
    }
    return linear(concat_cols({x_fine, x_coarse}), fusion_weight_, fusion_bias_);
}

InstanceFeatures TemporalNet::forward(const Tensor& features) const {
    InstanceFeatures out;
    out.x_fine = fine_forward(features);
    out.x_coarse = coarse_forward(features);
    out.x_instance = fuse(out.x_fine, out.x_coarse);
    return out;
}

void TemporalNet::register_parameters(ParameterSet& params) const {
    for (std::size_t i = 0; i < fine_layers_.size(); ++i)
        fine_layers_[i].register_into(params, "temporal.fine." + std::to_string(i), ParamGroup::temporal);
    for (std::size_t i = 0; i < coarse_layers_.size(); ++i)
        coarse_layers_[i].register_into(params, "temporal.coarse." + std::to_string(i), ParamGroup::temporal);
    params.add("temporal.fine.positional", fine_positional_, ParamGroup::temporal);
    params.add("temporal.coarse.positional", coarse_positional_, ParamGroup::temporal);
    params.add("temporal.fusion.weight", fusion_weight_, ParamGroup::temporal);
    params.add("temporal.fusion.bias", fusion_bias_, ParamGroup::temporal);
}

}  // namespace tgdfer
