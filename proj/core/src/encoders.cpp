#include "tgdfer/encoders.hpp"

#include <bit>
#include <cmath>

#include "tgdfer/errors.hpp"
#include "tgdfer/ops.hpp"
#include "tgdfer/random.hpp"

namespace tgdfer {

std::uint64_t checksum_values(std::span<const double> values, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

FrozenTextEncoder::FrozenTextEncoder(TextEncoderConfig config) : config_(config) {
    if (config_.vocab_size == 0 || config_.token_dim == 0 || config_.output_dim == 0 || config_.max_positions == 0) {
        throw ConfigError("text encoder dimensions must be positive");
    }
    Rng rng = make_rng(config_.seed, 0x74657874);
    token_table_ = normal_tensor(rng, {config_.vocab_size, config_.token_dim}, 1.0);
    position_table_ = normal_tensor(rng, {config_.max_positions, config_.token_dim}, 0.5);
    projection_ = normal_tensor(rng, {config_.token_dim, config_.output_dim},
                                1.0 / std::sqrt(static_cast<double>(config_.token_dim)));
}

Tensor FrozenTextEncoder::encode(const TokenSequence& tokens, const Tensor& context, const Tensor& prepended) const {
    if (tokens.ids.empty()) throw ConfigError("encode: empty token sequence");
    const std::size_t dt = config_.token_dim;
    std::vector<Tensor> slots;
    if (prepended.defined()) {
        if (prepended.numel() != dt) {
            throw ShapeError("encode: prepended token " + shape_to_string(prepended.shape()) + " must have " +
                             std::to_string(dt) + " entries");
        }
        slots.push_back(reshape(prepended, {1, dt}));
    }
    if (context.defined()) {
        if (context.rank() != 2 || context.dim(1) != dt) {
            throw ShapeError("encode: context " + shape_to_string(context.shape()) + " must be [M x " +
                             std::to_string(dt) + "]");
        }
        slots.push_back(context);
    }
    std::vector<std::size_t> ids;
    ids.reserve(tokens.ids.size());
    for (auto id : tokens.ids) {
        if (id >= config_.vocab_size) throw RangeError("encode: token id " + std::to_string(id) + " out of vocabulary");
        ids.push_back(id);
    }
    slots.push_back(gather_rows(token_table_, ids));
    Tensor sequence = slots.size() == 1 ? slots.front() : concat_rows(slots);

    const std::size_t length = sequence.dim(0);
    if (length > config_.max_positions) {
        throw RangeError("encode: sequence of " + std::to_string(length) + " slots exceeds " +
                         std::to_string(config_.max_positions) + " positions");
    }
    sequence = add(sequence, slice_rows(position_table_, 0, length));
    Tensor pooled = reshape(mean_rows(sequence), {1, dt});
    Tensor projected = reshape(matmul(pooled, projection_), {config_.output_dim});
    return l2_normalize(projected);
}

std::uint64_t FrozenTextEncoder::checksum() const {
    auto h = checksum_values(token_table_.values());
    h = checksum_values(position_table_.values(), h);
    return checksum_values(projection_.values(), h);
}

MockImageEncoder::MockImageEncoder(std::uint64_t seed, std::size_t output_dim, std::size_t pixel_dim)
    : output_dim_(output_dim), pixel_dim_(pixel_dim) {
    if (output_dim_ == 0 || pixel_dim_ == 0) throw ConfigError("image encoder dimensions must be positive");
    Rng rng = make_rng(seed, 0x696d6167);
    projection_ = normal_tensor(rng, {pixel_dim_, output_dim_}, 1.0 / std::sqrt(static_cast<double>(pixel_dim_)));
}

Tensor MockImageEncoder::encode_frames(std::uint64_t pixel_seed, std::size_t frames) const {
    if (frames == 0) throw ShapeError("encode_frames: need at least one frame");
    Rng rng = make_rng(pixel_seed, 0x706978);
    Tensor pixels = normal_tensor(rng, {frames, pixel_dim_}, 1.0);
    return l2_normalize(matmul(pixels, projection_));
}

std::uint64_t MockImageEncoder::checksum() const { return checksum_values(projection_.values()); }

}  // namespace tgdfer
