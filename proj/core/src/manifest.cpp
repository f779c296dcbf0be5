#include "tgdfer/manifest.hpp"

#include <fstream>
#include <set>

#include "tgdfer/errors.hpp"

namespace tgdfer {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split parse_split(const std::string& text) {
    if (text == "train") return Split::train;
    if (text == "test") return Split::test;
    throw ConfigError("unknown split '" + text + "' (expected train or test)");
}

DatasetManifest DatasetManifest::from_json(const json& doc, fs::path base_dir) {
    DatasetManifest m;
    try {
        m.feature_dim = doc.at("d").get<std::size_t>();
        m.class_count = doc.at("C").get<std::size_t>();
        m.class_names = doc.at("class_names").get<std::vector<std::string>>();
        m.fine_descriptors = doc.at("fine_descriptors").get<std::vector<std::string>>();
        for (const auto& b : doc.at("bags")) {
            m.bags.push_back({fs::path(b.at("path").get<std::string>()), parse_split(b.at("split").get<std::string>())});
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    m.base_dir = std::move(base_dir);
    m.validate();
    return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("manifest " + path.string() + ": " + e.what());
    }
    auto m = from_json(doc, path.parent_path());
    for (const auto& entry : m.bags) {
        if (!fs::exists(m.resolve(entry))) throw FormatError("manifest references missing bag " + m.resolve(entry).string());
    }
    return m;
}

json DatasetManifest::to_json() const {
    json bag_list = json::array();
    for (const auto& b : bags) bag_list.push_back({{"path", b.path.generic_string()}, {"split", to_string(b.split)}});
    return {{"d", feature_dim},
            {"C", class_count},
            {"class_names", class_names},
            {"fine_descriptors", fine_descriptors},
            {"bags", bag_list}};
}

void DatasetManifest::save(const fs::path& path) const {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write manifest " + path.string());
    out << to_json().dump(2) << '\n';
}

void DatasetManifest::validate() const {
    if (feature_dim == 0) throw FormatError("manifest: d must be positive");
    if (class_count == 0) throw FormatError("manifest: C must be positive");
    if (class_names.size() != class_count) throw FormatError("manifest: class_names must have C entries");
    if (fine_descriptors.size() != class_count) throw FormatError("manifest: fine_descriptors must have C entries");
    std::set<std::string> names(class_names.begin(), class_names.end());
    if (names.size() != class_names.size()) throw FormatError("manifest: class_names must be unique");
    std::set<std::string> seen;
    for (const auto& b : bags) {
        if (!seen.insert(b.path.lexically_normal().generic_string()).second) {
            throw FormatError("manifest: bag " + b.path.string() + " listed more than once (splits must be disjoint)");
        }
    }
}

fs::path DatasetManifest::resolve(const BagEntry& entry) const {
    return entry.path.is_absolute() ? entry.path : base_dir / entry.path;
}

std::vector<FrameBag> DatasetManifest::load_split(Split split) const {
    std::vector<FrameBag> out;
    for (const auto& entry : bags) {
        if (entry.split != split) continue;
        FrameBag bag = read_bag(resolve(entry), feature_dim);
        if (bag.label >= class_count) {
            throw FormatError("bag " + bag.bag_id + ": label " + std::to_string(bag.label) + " outside [0, " +
                              std::to_string(class_count) + ")");
        }
        out.push_back(std::move(bag));
    }
    return out;
}

std::size_t DatasetManifest::count(Split split) const {
    std::size_t n = 0;
    for (const auto& b : bags) n += b.split == split;
    return n;
}

std::uint64_t DatasetManifest::schema_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_byte = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    auto mix_text = [&](const std::string& s) {
        for (unsigned char c : s) mix_byte(c);
        mix_byte(0);
    };
    mix_text(std::to_string(feature_dim));
    mix_text(std::to_string(class_count));
    for (const auto& name : class_names) mix_text(name);
    return h;
}

}  // namespace tgdfer
