#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgdfer/bag_io.hpp"

namespace tgdfer {

enum class Split { train, test };
std::string to_string(Split split);
Split parse_split(const std::string& text);

struct BagEntry {
    std::filesystem::path path;  // as written in the manifest (relative to its directory)
    Split split = Split::train;
};

// JSON document: {d, C, class_names[], fine_descriptors[], bags[{path, split}]}.
struct DatasetManifest {
    std::size_t feature_dim = 0;
    std::size_t class_count = 0;
    std::vector<std::string> class_names;
    std::vector<std::string> fine_descriptors;
    std::vector<BagEntry> bags;
    std::filesystem::path base_dir;  // directory the relative bag paths resolve against

    // Parses, validates structure and checks that every bag file exists.
    static DatasetManifest load(const std::filesystem::path& path);
    static DatasetManifest from_json(const nlohmann::json& doc, std::filesystem::path base_dir);
    nlohmann::json to_json() const;
    void save(const std::filesystem::path& path) const;

    void validate() const;
    std::filesystem::path resolve(const BagEntry& entry) const;
    // Reads every bag of the split, checking dimension and label range.
    std::vector<FrameBag> load_split(Split split) const;
    std::size_t count(Split split) const;

    // Identity of the label space: d, C and class names.
    std::uint64_t schema_hash() const;
};

}  // namespace tgdfer
