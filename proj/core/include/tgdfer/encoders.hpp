#pragma once

#include <cstdint>

#include "tgdfer/tensor.hpp"
#include "tgdfer/tokenizer.hpp"

namespace tgdfer {

enum class EncoderKind { mock_text, mock_image };

struct TextEncoderConfig {
    std::uint64_t seed = 2024;
    std::size_t vocab_size = kVocabularySize;
    std::size_t token_dim = 32;
    std::size_t output_dim = 32;
    // Positional slots shared by prepended tokens, context and text tokens.
    std::size_t max_positions = 128;
};

// Frozen stand-in for a pretrained text tower:
//   (token embedding + position embedding) -> mean pool -> linear -> L2 norm.
// Its weights never require grad, but gradients pass through to continuous
// inputs (learnable context, prepended visual tokens).
class FrozenTextEncoder {
public:
    explicit FrozenTextEncoder(TextEncoderConfig config = {});

    // Slot order: [prepended?, context rows?, token rows]. `context` is
    // [M×token_dim], `prepended` is [token_dim]; pass an undefined Tensor to omit.
    Tensor encode(const TokenSequence& tokens, const Tensor& context = {}, const Tensor& prepended = {}) const;

    EncoderKind kind() const { return EncoderKind::mock_text; }
    const TextEncoderConfig& config() const { return config_; }
    std::size_t token_dim() const { return config_.token_dim; }
    std::size_t output_dim() const { return config_.output_dim; }
    std::uint64_t checksum() const;

private:
    TextEncoderConfig config_;
    Tensor token_table_;     // [V×token_dim]
    Tensor position_table_;  // [max_positions×token_dim]
    Tensor projection_;      // [token_dim×output_dim]
};

// Frozen stand-in for the image tower, driven by synthetic "pixels": each
// frame is a seeded random pixel vector pushed through a frozen projection
// and L2-normalised.
class MockImageEncoder {
public:
    MockImageEncoder(std::uint64_t seed, std::size_t output_dim, std::size_t pixel_dim = 64);

    Tensor encode_frames(std::uint64_t pixel_seed, std::size_t frames) const;

    EncoderKind kind() const { return EncoderKind::mock_image; }
    std::size_t output_dim() const { return output_dim_; }
    std::uint64_t checksum() const;

private:
    std::size_t output_dim_;
    std::size_t pixel_dim_;
    Tensor projection_;  // [pixel_dim×output_dim]
};

// FNV-1a over the bit patterns of the given values.
std::uint64_t checksum_values(std::span<const double> values, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace tgdfer
