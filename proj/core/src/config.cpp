#include "tgdfer/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "tgdfer/errors.hpp"

namespace tgdfer {

using nlohmann::json;

namespace {

std::string activation_name(Activation a) { return a == Activation::gelu ? "gelu" : "relu"; }

Activation parse_activation(const std::string& text) {
    if (text == "gelu") return Activation::gelu;
    if (text == "relu") return Activation::relu;
    throw ConfigError("unknown activation '" + text + "' (expected gelu or relu)");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

}  // namespace

std::uint64_t fnv1a_text(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void TrainConfig::validate() const {
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(lr.temporal > 0.0) || !(lr.prompts > 0.0) || !(lr.head > 0.0)) {
        throw ConfigError("all learning rates must be positive");
    }
    for (std::size_t i = 0; i < milestones.size(); ++i) {
        if (i > 0 && milestones[i] <= milestones[i - 1]) throw ConfigError("milestones must be strictly increasing");
        if (milestones[i] >= epochs) throw ConfigError("milestones must be below the epoch count");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(tau_a > 0.0) || !(tau_p > 0.0)) throw ConfigError("temperatures must be positive");
    const auto& seg = temporal.segmentation;
    if (seg.window == 0 || seg.stride == 0 || seg.stride > seg.window) {
        throw ConfigError("segmentation needs 1 <= stride <= window");
    }
    if (temporal.heads == 0) throw ConfigError("heads must be positive");
    if (aggregation == Aggregation::topk && topk == 0) throw ConfigError("topk must be positive");
}

json TrainConfig::to_json() const {
    return {
        {"seed", seed},
        {"epochs", epochs},
        {"batch_size", batch_size},
        {"lr", {{"temporal", lr.temporal}, {"prompts", lr.prompts}, {"head", lr.head}}},
        {"milestones", milestones},
        {"gamma", gamma},
        {"tau_a", tau_a},
        {"tau_p", tau_p},
        {"temporal",
         {{"window", temporal.segmentation.window},
          {"stride", temporal.segmentation.stride},
          {"cover_tail", temporal.segmentation.cover_tail},
          {"fine_depth", temporal.fine_depth},
          {"coarse_depth", temporal.coarse_depth},
          {"heads", temporal.heads},
          {"max_frames", temporal.max_frames},
          {"activation", activation_name(temporal.activation)}}},
        {"prompt",
         {{"source", to_string(prompt.source)},
          {"learnable_context", prompt.learnable_context},
          {"context_length", prompt.context_length},
          {"visual_prompt", to_string(prompt.visual_prompt)},
          {"activation", activation_name(prompt.activation)},
          {"mlp_mult", prompt.mlp_mult}}},
        {"aggregation", to_string(aggregation)},
        {"topk", topk},
        {"text_encoder",
         {{"seed", text_encoder.seed},
          {"vocab_size", text_encoder.vocab_size},
          {"token_dim", text_encoder.token_dim},
          {"max_positions", text_encoder.max_positions}}},
    };
}

TrainConfig TrainConfig::from_json(const json& doc) {
    TrainConfig c;
    try {
        reject_unknown(doc,
                       {"seed", "epochs", "batch_size", "lr", "milestones", "gamma", "tau_a", "tau_p", "temporal",
                        "prompt", "aggregation", "topk", "text_encoder"},
                       "config");
        read(doc, "seed", c.seed);
        read(doc, "epochs", c.epochs);
        read(doc, "batch_size", c.batch_size);
        if (doc.contains("lr")) {
            const auto& lr = doc.at("lr");
            reject_unknown(lr, {"temporal", "prompts", "head"}, "config.lr");
            read(lr, "temporal", c.lr.temporal);
            read(lr, "prompts", c.lr.prompts);
            read(lr, "head", c.lr.head);
        }
        read(doc, "milestones", c.milestones);
        read(doc, "gamma", c.gamma);
        read(doc, "tau_a", c.tau_a);
        read(doc, "tau_p", c.tau_p);
        if (doc.contains("temporal")) {
            const auto& t = doc.at("temporal");
            reject_unknown(t,
                           {"window", "stride", "cover_tail", "fine_depth", "coarse_depth", "heads", "max_frames",
                            "activation"},
                           "config.temporal");
            read(t, "window", c.temporal.segmentation.window);
            read(t, "stride", c.temporal.segmentation.stride);
            read(t, "cover_tail", c.temporal.segmentation.cover_tail);
            read(t, "fine_depth", c.temporal.fine_depth);
            read(t, "coarse_depth", c.temporal.coarse_depth);
            read(t, "heads", c.temporal.heads);
            read(t, "max_frames", c.temporal.max_frames);
            if (t.contains("activation")) c.temporal.activation = parse_activation(t.at("activation").get<std::string>());
        }
        if (doc.contains("prompt")) {
            const auto& p = doc.at("prompt");
            reject_unknown(p, {"source", "learnable_context", "context_length", "visual_prompt", "activation", "mlp_mult"},
                           "config.prompt");
            if (p.contains("source")) c.prompt.source = parse_prompt_source(p.at("source").get<std::string>());
            read(p, "learnable_context", c.prompt.learnable_context);
            read(p, "context_length", c.prompt.context_length);
            if (p.contains("visual_prompt")) {
                c.prompt.visual_prompt = parse_visual_prompt_mode(p.at("visual_prompt").get<std::string>());
            }
            if (p.contains("activation")) c.prompt.activation = parse_activation(p.at("activation").get<std::string>());
            read(p, "mlp_mult", c.prompt.mlp_mult);
        }
        if (doc.contains("aggregation")) c.aggregation = parse_aggregation(doc.at("aggregation").get<std::string>());
        read(doc, "topk", c.topk);
        if (doc.contains("text_encoder")) {
            const auto& e = doc.at("text_encoder");
            reject_unknown(e, {"seed", "vocab_size", "token_dim", "max_positions"}, "config.text_encoder");
            read(e, "seed", c.text_encoder.seed);
            read(e, "vocab_size", c.text_encoder.vocab_size);
            read(e, "token_dim", c.text_encoder.token_dim);
            read(e, "max_positions", c.text_encoder.max_positions);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

std::uint64_t TrainConfig::hash() const { return fnv1a_text(to_json().dump()); }

GroupRates lr_at(std::size_t epoch, const TrainConfig& config) {
    std::size_t passed = 0;
    for (auto m : config.milestones) passed += m <= epoch;
    const double factor = std::pow(config.gamma, static_cast<double>(passed));
    GroupRates rates{};
    rates[static_cast<std::size_t>(ParamGroup::temporal)] = config.lr.temporal * factor;
    rates[static_cast<std::size_t>(ParamGroup::prompts)] = config.lr.prompts * factor;
    rates[static_cast<std::size_t>(ParamGroup::head)] = config.lr.head * factor;
    return rates;
}

}  // namespace tgdfer
