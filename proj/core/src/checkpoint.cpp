#include "tgdfer/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "tgdfer/errors.hpp"

namespace tgdfer {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "tgdfer-checkpoint";
constexpr int kVersion = 1;

std::string hex(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

}  // namespace

json checkpoint_to_json(const TgdferModel& model) {
    json params = json::array();
    for (const auto& p : model.parameters()) {
        params.push_back({{"name", p.name},
                          {"group", std::string(to_string(p.group))},
                          {"shape", p.tensor.shape()},
                          {"values", std::vector<double>(p.tensor.values().begin(), p.tensor.values().end())}});
    }
    return {{"format", kFormat},
            {"version", kVersion},
            {"config", model.config().to_json()},
            {"config_hash", hex(model.config().hash())},
            {"feature_dim", model.feature_dim()},
            {"class_names", model.class_names()},
            {"fine_descriptors", model.descriptors()},
            {"schema_hash", hex(model.schema_hash())},
            {"frozen_checksum", hex(model.frozen_checksum())},
            {"parameters", params}};
}

std::unique_ptr<TgdferModel> model_from_checkpoint(const json& doc) {
    try {
        if (doc.at("format").get<std::string>() != kFormat || doc.at("version").get<int>() != kVersion) {
            throw FormatError("checkpoint: unsupported format or version");
        }
        const auto config = TrainConfig::from_json(doc.at("config"));
        if (hex(config.hash()) != doc.at("config_hash").get<std::string>()) {
            throw FormatError("checkpoint: config hash mismatch");
        }
        auto model = std::make_unique<TgdferModel>(config, doc.at("feature_dim").get<std::size_t>(),
                                                   doc.at("class_names").get<std::vector<std::string>>(),
                                                   doc.at("fine_descriptors").get<std::vector<std::string>>());
        if (hex(model->frozen_checksum()) != doc.at("frozen_checksum").get<std::string>()) {
            throw FormatError("checkpoint: frozen encoder checksum mismatch");
        }
        const auto& stored = doc.at("parameters");
        if (stored.size() != model->parameters().size()) throw FormatError("checkpoint: parameter count mismatch");
        for (const auto& entry : stored) {
            const auto name = entry.at("name").get<std::string>();
            if (!model->parameters().contains(name)) throw FormatError("checkpoint: unexpected parameter " + name);
            Tensor t = model->parameters().at(name);
            if (entry.at("shape").get<Shape>() != t.shape()) throw FormatError("checkpoint: shape mismatch for " + name);
            const auto values = entry.at("values").get<std::vector<double>>();
            auto dst = t.mutable_values();
            if (values.size() != dst.size()) throw FormatError("checkpoint: size mismatch for " + name);
            std::copy(values.begin(), values.end(), dst.begin());
        }
        return model;
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const TgdferModel& model) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write checkpoint " + path.string());
    out << checkpoint_to_json(model).dump() << '\n';
}

std::unique_ptr<TgdferModel> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("checkpoint " + path.string() + ": " + e.what());
    }
    return model_from_checkpoint(doc);
}

}  // namespace tgdfer
