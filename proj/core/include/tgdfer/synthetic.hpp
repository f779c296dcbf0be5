#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgdfer/bag_io.hpp"
#include "tgdfer/manifest.hpp"

namespace tgdfer {

enum class IntensityProfile { step, ramp };

// Planted-salient-frame benchmark. Each bag hides a contiguous run of
// `salient_count` frames carrying its class prototype among distractor
// frames built from the other classes' prototypes.
struct SyntheticSpec {
    std::size_t train_bags = 200;
    std::size_t test_bags = 50;
    std::size_t frames = 16;
    std::size_t dim = 32;
    std::size_t classes = 4;
    std::size_t salient_count = 4;
    double signal_strength = 2.0;
    double noise_std = 0.5;
    // Amplitude of the off-class prototype mixture in distractor frames.
    double distractor_strength = 0.5;
    IntensityProfile intensity_profile = IntensityProfile::step;

    void validate() const;
    nlohmann::json to_json() const;
    static SyntheticSpec from_json(const nlohmann::json& doc);
    static SyntheticSpec load(const std::filesystem::path& path);
};

using SaliencyMasks = std::map<std::string, std::vector<std::uint8_t>>;

struct SyntheticBag {
    FrameBag bag;
    Split split = Split::train;
    std::vector<std::uint8_t> salient;  // 1 for planted frames
};

struct SyntheticData {
    SyntheticSpec spec;
    Tensor prototypes;  // [C×d], unit rows, pairwise cosine < 0.3
    std::vector<std::string> class_names;
    std::vector<std::string> descriptors;
    std::vector<SyntheticBag> bags;

    std::vector<FrameBag> split(Split which) const;
    SaliencyMasks masks() const;
};

inline constexpr double kMaxPrototypeCosine = 0.3;

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Writes bags/<id>.tgfb, manifest.json, masks.json and spec.json.
DatasetManifest write_synthetic(const SyntheticData& data, const std::filesystem::path& out_dir);

void save_masks(const std::filesystem::path& path, const SaliencyMasks& masks);
SaliencyMasks load_masks(const std::filesystem::path& path);

}  // namespace tgdfer
