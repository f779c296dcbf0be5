#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgdfer/tensor.hpp"

namespace tgdfer {

enum class BagSource { mock, imported };

// One video: T frame feature rows and the bag-level class label.
struct FrameBag {
    std::string bag_id;
    Tensor features;  // [T×d]
    std::uint32_t label = 0;
    BagSource source = BagSource::mock;

    std::size_t frames() const { return features.dim(0); }
    std::size_t dim() const { return features.dim(1); }
};

// TGFB layout, little-endian:
//   "TGFB" | u32 version=1 | u32 T | u32 d | u32 label | u32 id_len | id bytes | T·d float32 row-major
inline constexpr std::uint32_t kBagFormatVersion = 1;
inline constexpr std::size_t kBagHeaderBytes = 24;

std::vector<std::uint8_t> encode_bag(const FrameBag& bag);
FrameBag decode_bag(std::span<const std::uint8_t> bytes, std::optional<std::size_t> expected_dim = std::nullopt);

void write_bag(const std::filesystem::path& path, const FrameBag& bag);
FrameBag read_bag(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = std::nullopt);

// TGTE: same header layout with magic "TGTE"; the row count sits in the T
// field and the label field is reserved (0).
struct TextEmbeddingTable {
    std::string name;
    Tensor rows;  // [C×d]
};

std::vector<std::uint8_t> encode_text_embeddings(const TextEmbeddingTable& table);
TextEmbeddingTable decode_text_embeddings(std::span<const std::uint8_t> bytes);
void write_text_embeddings(const std::filesystem::path& path, const TextEmbeddingTable& table);
TextEmbeddingTable read_text_embeddings(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Writes via a sibling temporary file and a rename.
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace tgdfer
