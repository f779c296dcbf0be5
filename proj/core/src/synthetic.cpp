#include "tgdfer/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "tgdfer/errors.hpp"
#include "tgdfer/random.hpp"

namespace tgdfer {

using nlohmann::json;

namespace {

constexpr std::uint64_t kPrototypeStream = 0x70726f74;
constexpr std::uint64_t kBagStream = 0x62616773;

struct ClassText {
    const char* name;
    const char* descriptor;
};

// Seven basic expressions with hand-written movement descriptors.
constexpr ClassText kExpressions[] = {
    {"happiness", "a smiling mouth, widened eyes, raised cheeks"},
    {"sadness", "drooping eyelids, lowered lip corners, inner brows raised"},
    {"neutral", "relaxed face, closed lips, steady gaze"},
    {"anger", "lowered brows pulled together, tightened lips, glaring eyes"},
    {"surprise", "raised eyebrows, wide open eyes, dropped jaw"},
    {"disgust", "wrinkled nose, raised upper lip, narrowed eyes"},
    {"fear", "raised and drawn brows, tensed lower eyelids, stretched lips"},
};

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> sample_prototypes(const SyntheticSpec& spec, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t c = spec.classes, d = spec.dim;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<double> protos(c * d);
        for (auto& v : protos) v = gauss(rng);
        for (std::size_t k = 0; k < c; ++k) {
            std::vector<double> row(protos.begin() + static_cast<std::ptrdiff_t>(k * d),
                                    protos.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
            const double n = norm(row);
            for (std::size_t j = 0; j < d; ++j) protos[k * d + j] /= n;
        }
        bool ok = true;
        for (std::size_t a = 0; a < c && ok; ++a)
            for (std::size_t b = a + 1; b < c && ok; ++b) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += protos[a * d + j] * protos[b * d + j];
                ok = dot < kMaxPrototypeCosine;
            }
        if (ok) return protos;
    }
    throw ConfigError("could not draw " + std::to_string(c) + " prototypes with pairwise cosine < 0.3 in " +
                      std::to_string(d) + " dimensions");
}

}  // namespace

void SyntheticSpec::validate() const {
    if (train_bags == 0 && test_bags == 0) throw ConfigError("synthetic spec: no bags requested");
    if (frames == 0 || dim == 0 || classes == 0) throw ConfigError("synthetic spec: T, d and C must be positive");
    if (salient_count < 1 || salient_count > frames) throw ConfigError("synthetic spec: need 1 <= salient_count <= T");
    if (!(signal_strength > 0.0)) throw ConfigError("synthetic spec: signal_strength must be positive");
    if (!(noise_std >= 0.0) || !(distractor_strength >= 0.0)) {
        throw ConfigError("synthetic spec: noise_std and distractor_strength must be non-negative");
    }
    if (salient_count < frames && noise_std == 0.0 && (classes == 1 || distractor_strength == 0.0)) {
        throw ConfigError("synthetic spec: distractor frames would be all-zero");
    }
}

json SyntheticSpec::to_json() const {
    return {{"bags_per_split", {{"train", train_bags}, {"test", test_bags}}},
            {"T", frames},
            {"d", dim},
            {"C", classes},
            {"salient_count", salient_count},
            {"signal_strength", signal_strength},
            {"noise_std", noise_std},
            {"distractor_strength", distractor_strength},
            {"intensity_profile", intensity_profile == IntensityProfile::step ? "step" : "ramp"}};
}

SyntheticSpec SyntheticSpec::from_json(const json& doc) {
    SyntheticSpec s;
    try {
        if (!doc.is_object()) throw ConfigError("synthetic spec must be a JSON object");
        static const std::set<std::string> known{"bags_per_split", "T", "d", "C", "salient_count", "signal_strength",
                                                 "noise_std", "distractor_strength", "intensity_profile"};
        for (const auto& [key, value] : doc.items())
            if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in synthetic spec");
        if (doc.contains("bags_per_split")) {
            const auto& b = doc.at("bags_per_split");
            if (b.is_number()) {
                s.train_bags = s.test_bags = b.get<std::size_t>();
            } else {
                if (b.contains("train")) s.train_bags = b.at("train").get<std::size_t>();
                if (b.contains("test")) s.test_bags = b.at("test").get<std::size_t>();
            }
        }
        if (doc.contains("T")) s.frames = doc.at("T").get<std::size_t>();
        if (doc.contains("d")) s.dim = doc.at("d").get<std::size_t>();
        if (doc.contains("C")) s.classes = doc.at("C").get<std::size_t>();
        if (doc.contains("salient_count")) s.salient_count = doc.at("salient_count").get<std::size_t>();
        if (doc.contains("signal_strength")) s.signal_strength = doc.at("signal_strength").get<double>();
        if (doc.contains("noise_std")) s.noise_std = doc.at("noise_std").get<double>();
        if (doc.contains("distractor_strength")) s.distractor_strength = doc.at("distractor_strength").get<double>();
        if (doc.contains("intensity_profile")) {
            const auto p = doc.at("intensity_profile").get<std::string>();
            if (p == "step") {
                s.intensity_profile = IntensityProfile::step;
            } else if (p == "ramp") {
                s.intensity_profile = IntensityProfile::ramp;
            } else {
                throw ConfigError("synthetic spec: intensity_profile must be step or ramp");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    }
    s.validate();
    return s;
}

SyntheticSpec SyntheticSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synthetic spec " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError("synthetic spec " + path.string() + ": " + e.what());
    }
}

std::vector<FrameBag> SyntheticData::split(Split which) const {
    std::vector<FrameBag> out;
    for (const auto& b : bags)
        if (b.split == which) out.push_back(b.bag);
    return out;
}

SaliencyMasks SyntheticData::masks() const {
    SaliencyMasks out;
    for (const auto& b : bags) out[b.bag.bag_id] = b.salient;
    return out;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    SyntheticData data;
    data.spec = spec;
    const std::size_t c = spec.classes, d = spec.dim, frames = spec.frames;

    Rng proto_rng = make_rng(seed, kPrototypeStream);
    const auto protos = sample_prototypes(spec, proto_rng);
    data.prototypes = Tensor::matrix(c, d, protos);
    for (std::size_t k = 0; k < c; ++k) {
        if (c <= std::size(kExpressions)) {
            data.class_names.emplace_back(kExpressions[k].name);
            data.descriptors.emplace_back(kExpressions[k].descriptor);
        } else {
            data.class_names.push_back("class " + std::to_string(k));
            data.descriptors.push_back("expression pattern number " + std::to_string(k));
        }
    }

    Rng rng = make_rng(seed, kBagStream);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::exponential_distribution<double> dirichlet_draw(1.0);
    std::uniform_int_distribution<std::size_t> start_dist(0, frames - spec.salient_count);

    auto make_bag = [&](Split split, std::size_t index) {
        SyntheticBag out;
        out.split = split;
        const auto label = static_cast<std::uint32_t>(index % c);
        const std::size_t start = start_dist(rng);
        out.salient.assign(frames, 0);
        std::vector<double> values(frames * d);
        std::vector<double> frame(d);
        for (std::size_t t = 0; t < frames; ++t) {
            std::fill(frame.begin(), frame.end(), 0.0);
            if (t >= start && t < start + spec.salient_count) {
                out.salient[t] = 1;
                double amplitude = spec.signal_strength;
                if (spec.intensity_profile == IntensityProfile::ramp) {
                    amplitude *= static_cast<double>(t - start + 1) / static_cast<double>(spec.salient_count);
                }
                for (std::size_t j = 0; j < d; ++j) frame[j] = amplitude * protos[label * d + j];
            } else if (c > 1) {
                std::vector<double> weights(c, 0.0);
                double total = 0.0;
                for (std::size_t k = 0; k < c; ++k) {
                    if (k == label) continue;
                    weights[k] = dirichlet_draw(rng);
                    total += weights[k];
                }
                for (std::size_t k = 0; k < c; ++k) {
                    const double w = spec.distractor_strength * weights[k] / total;
                    for (std::size_t j = 0; j < d; ++j) frame[j] += w * protos[k * d + j];
                }
            }
            if (spec.noise_std > 0.0)
                for (auto& v : frame) v += spec.noise_std * noise(rng);
            const double n = norm(frame);
            if (!(n > 0.0)) throw ConfigError("synthetic generator produced an all-zero frame");
            for (std::size_t j = 0; j < d; ++j) values[t * d + j] = frame[j] / n;
        }
        out.bag.bag_id = to_string(split) + "_" + std::to_string(index);
        out.bag.features = Tensor::matrix(frames, d, std::move(values));
        out.bag.label = label;
        out.bag.source = BagSource::mock;
        return out;
    };

    for (std::size_t i = 0; i < spec.train_bags; ++i) data.bags.push_back(make_bag(Split::train, i));
    for (std::size_t i = 0; i < spec.test_bags; ++i) data.bags.push_back(make_bag(Split::test, i));
    return data;
}

void save_masks(const std::filesystem::path& path, const SaliencyMasks& masks) {
    json doc = json::object();
    for (const auto& [id, mask] : masks) doc[id] = mask;
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write masks " + path.string());
    out << doc.dump(1) << '\n';
}

SaliencyMasks load_masks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("missing saliency masks: cannot open " + path.string());
    try {
        const auto doc = json::parse(in);
        SaliencyMasks out;
        for (const auto& [id, mask] : doc.items()) out[id] = mask.get<std::vector<std::uint8_t>>();
        return out;
    } catch (const json::exception& e) {
        throw FormatError("masks " + path.string() + ": " + e.what());
    }
}

DatasetManifest write_synthetic(const SyntheticData& data, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir / "bags");
    DatasetManifest manifest;
    manifest.feature_dim = data.spec.dim;
    manifest.class_count = data.spec.classes;
    manifest.class_names = data.class_names;
    manifest.fine_descriptors = data.descriptors;
    manifest.base_dir = out_dir;
    for (const auto& b : data.bags) {
        const auto rel = std::filesystem::path("bags") / (b.bag.bag_id + ".tgfb");
        write_bag(out_dir / rel, b.bag);
        manifest.bags.push_back({rel, b.split});
    }
    manifest.validate();
    manifest.save(out_dir / "manifest.json");
    save_masks(out_dir / "masks.json", data.masks());
    std::ofstream spec_out(out_dir / "spec.json");
    spec_out << data.spec.to_json().dump(2) << '\n';
    return manifest;
}

}  // namespace tgdfer
