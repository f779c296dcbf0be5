#pragma once

#include <span>
#include <string>
#include <vector>

#include "tgdfer/ops.hpp"
#include "tgdfer/optim.hpp"
#include "tgdfer/random.hpp"
#include "tgdfer/tensor.hpp"

namespace tgdfer {

// Sliding windows over the frame axis. overlap = window - stride.
struct SegmentationConfig {
    std::size_t window = 4;
    std::size_t stride = 1;
    // Append one extra window ending at the last frame when the regular
    // starts leave trailing frames uncovered.
    bool cover_tail = true;

    std::size_t overlap() const { return window - stride; }
    // Throws unless 1 <= stride <= window <= frames.
    void validate(std::size_t frames) const;
};

// Window start frames: floor((T - w) / s) + 1 regular starts, plus T - w if
// cover_tail applies.
std::vector<std::size_t> segment_starts(std::size_t frames, const SegmentationConfig& cfg);
// How many windows cover each frame.
std::vector<std::size_t> coverage_counts(std::size_t frames, const SegmentationConfig& cfg);

struct Segments {
    std::vector<Tensor> windows;  // each [w×d]
    std::vector<std::size_t> starts;
};
Segments segment(const Tensor& features, const SegmentationConfig& cfg);

struct EncoderLayerParams {
    Tensor ln1_gain, ln1_bias;
    Tensor wq, bq, wk, bk, wv, bv;
    Tensor wo, bo;  // attention output map, zero at init
    Tensor ln2_gain, ln2_bias;
    Tensor w1, b1;
    Tensor w2, b2;  // feed-forward output map, zero at init

    static EncoderLayerParams init(Rng& rng, std::size_t dim, std::size_t ffn_mult = 4);
    void register_into(ParameterSet& params, const std::string& prefix, ParamGroup group) const;
};

struct EncoderOptions {
    std::size_t heads = 4;
    Activation activation = Activation::gelu;
};

// Pre-norm transformer layer applied independently to each block of
// `block_len` consecutive rows: x + MHA(LN(x)), then + FFN(LN(.)).
Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& layer, const EncoderOptions& options,
                     std::size_t block_len, AttentionTrace* trace = nullptr);
Tensor encoder_stack(const Tensor& x, std::span<const EncoderLayerParams> layers, const EncoderOptions& options,
                     std::size_t block_len);

struct TemporalNetConfig {
    std::size_t dim = 32;
    SegmentationConfig segmentation;
    std::size_t fine_depth = 1;
    std::size_t coarse_depth = 1;
    std::size_t heads = 4;
    std::size_t max_frames = 64;
    Activation activation = Activation::gelu;
};

struct InstanceFeatures {
    Tensor x_fine;      // [T×d]
    Tensor x_coarse;    // [T×d]
    Tensor x_instance;  // [T×d]
};

// Fine branch: windowed encoder over overlapping segments, scatter-averaged
// back to one row per frame. Coarse branch: encoder over the whole bag.
// Fusion: per-frame concatenation followed by a shared linear map 2d -> d.
class TemporalNet {
public:
    TemporalNet(TemporalNetConfig config, Rng& rng);

    Tensor fine_forward(const Tensor& features) const;
    Tensor coarse_forward(const Tensor& features) const;
    Tensor fuse(const Tensor& x_fine, const Tensor& x_coarse) const;
    InstanceFeatures forward(const Tensor& features) const;

    void register_parameters(ParameterSet& params) const;

    const TemporalNetConfig& config() const { return config_; }
    const std::vector<EncoderLayerParams>& fine_layers() const { return fine_layers_; }
    const std::vector<EncoderLayerParams>& coarse_layers() const { return coarse_layers_; }
    const Tensor& fine_positional() const { return fine_positional_; }
    const Tensor& coarse_positional() const { return coarse_positional_; }
    const Tensor& fusion_weight() const { return fusion_weight_; }
    const Tensor& fusion_bias() const { return fusion_bias_; }

private:
    EncoderOptions encoder_options() const { return {config_.heads, config_.activation}; }

    TemporalNetConfig config_;
    std::vector<EncoderLayerParams> fine_layers_;
    std::vector<EncoderLayerParams> coarse_layers_;
    Tensor fine_positional_;    // [w×d]
    Tensor coarse_positional_;  // [max_frames×d]
    Tensor fusion_weight_;      // [2d×d]
    Tensor fusion_bias_;        // [d]
};

}  // namespace tgdfer
