#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "support.hpp"
#include "tgdfer/checkpoint.hpp"
#include "tgdfer/errors.hpp"
#include "tgdfer/influence_report.hpp"
#include "tgdfer/synthetic.hpp"
#include "tgdfer/trainer.hpp"

using namespace tgdfer;
using tgdfer::testing::TempDir;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec s;
    s.train_bags = 24;
    s.test_bags = 9;
    s.frames = 8;
    s.dim = 16;
    s.classes = 3;
    s.salient_count = 3;
    return s;
}

TrainConfig small_config(std::uint64_t seed = 5) {
    TrainConfig c;
    c.seed = seed;
    c.epochs = 2;
    c.milestones = {1};
    c.batch_size = 4;
    c.temporal.segmentation = {4, 2, true};
    c.temporal.fine_depth = 1;
    c.temporal.coarse_depth = 1;
    return c;
}

std::unique_ptr<TgdferModel> make_model(const SyntheticData& data, const TrainConfig& config) {
    return std::make_unique<TgdferModel>(config, data.spec.dim, data.class_names, data.descriptors);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Synthetic, NoiselessFullySalientBagsAreThePrototype) {
    auto spec = small_spec();
    spec.noise_std = 0.0;
    spec.salient_count = spec.frames;
    const auto data = generate_synthetic(spec, 3);
    for (const auto& b : data.bags) {
        for (std::size_t t = 0; t < spec.frames; ++t)
            for (std::size_t c = 0; c < spec.dim; ++c)
                EXPECT_NEAR(b.bag.features.at(t, c), data.prototypes.at(b.bag.label, c), 1e-12);
    }
}

TEST(Synthetic, PrototypesAreSpreadOut) {
    SyntheticSpec spec;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = generate_synthetic(spec, seed);
        for (std::size_t i = 0; i < spec.classes; ++i)
            for (std::size_t j = i + 1; j < spec.classes; ++j) {
                double dot = 0.0;
                for (std::size_t c = 0; c < spec.dim; ++c) dot += data.prototypes.at(i, c) * data.prototypes.at(j, c);
                EXPECT_LT(dot, kMaxPrototypeCosine);
            }
    }
}

TEST(Synthetic, MasksAreContiguousRunsAndLabelsBalanced) {
    const auto spec = small_spec();
    const auto data = generate_synthetic(spec, 4);
    EXPECT_EQ(data.split(Split::train).size(), spec.train_bags);
    EXPECT_EQ(data.split(Split::test).size(), spec.test_bags);
    std::vector<std::size_t> per_class(spec.classes, 0);
    for (const auto& b : data.bags) {
        ASSERT_EQ(b.salient.size(), spec.frames);
        const auto first = std::find(b.salient.begin(), b.salient.end(), 1) - b.salient.begin();
        for (std::size_t t = 0; t < spec.frames; ++t) {
            const bool inside = t >= static_cast<std::size_t>(first) && t < first + spec.salient_count;
            EXPECT_EQ(b.salient[t], inside ? 1 : 0);
        }
        if (b.split == Split::train) ++per_class[b.bag.label];
        for (std::size_t t = 0; t < spec.frames; ++t) {
            double n = 0.0;
            for (std::size_t c = 0; c < spec.dim; ++c) n += b.bag.features.at(t, c) * b.bag.features.at(t, c);
            EXPECT_NEAR(n, 1.0, 1e-12);
        }
    }
    EXPECT_EQ(per_class, (std::vector<std::size_t>(3, 8)));
}

TEST(Synthetic, SameSeedWritesIdenticalBytes) {
    TempDir a("syn_a"), b("syn_b");
    const auto spec = small_spec();
    const auto manifest = write_synthetic(generate_synthetic(spec, 11), a.path());
    write_synthetic(generate_synthetic(spec, 11), b.path());
    for (const auto& entry : manifest.bags)
        EXPECT_EQ(slurp(a.path() / entry.path), slurp(b.path() / entry.path)) << entry.path;
    for (const char* name : {"manifest.json", "masks.json", "spec.json"})
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    const auto other = generate_synthetic(spec, 12);
    EXPECT_NE(generate_synthetic(spec, 11).bags[0].bag.features.at(0, 0), other.bags[0].bag.features.at(0, 0));
}

TEST(Synthetic, SpecJsonAndValidation) {
    auto spec = small_spec();
    spec.intensity_profile = IntensityProfile::ramp;
    EXPECT_EQ(SyntheticSpec::from_json(spec.to_json()).to_json(), spec.to_json());
    spec.salient_count = spec.frames + 1;
    EXPECT_THROW(spec.validate(), ConfigError);
    EXPECT_THROW(SyntheticSpec::from_json(nlohmann::json::parse(R"({"frames_per_bag": 3})")), ConfigError);
}

TEST(Training, SameSeedIsBitIdentical) {
    const auto data = generate_synthetic(small_spec(), 1);
    const auto bags = data.split(Split::train);
    auto a = make_model(data, small_config()), b = make_model(data, small_config());
    const auto ra = train(*a, bags), rb = train(*b, bags);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(ra.final_loss), std::bit_cast<std::uint64_t>(rb.final_loss));
    EXPECT_EQ(checkpoint_to_json(*a).dump(), checkpoint_to_json(*b).dump());
}

TEST(Training, LogsScheduledRatesAndKeepsEncoderFrozen) {
    const auto data = generate_synthetic(small_spec(), 1);
    const auto config = small_config();
    auto model = make_model(data, config);
    const auto frozen = model->frozen_checksum();
    const auto before = model->parameters().checksum();
    const auto result = train(*model, data.split(Split::train));
    ASSERT_EQ(result.log.size(), 2u);
    for (const auto& e : result.log) {
        EXPECT_EQ(e.lrs, lr_at(e.epoch, config));
        EXPECT_TRUE(std::isfinite(e.loss));
    }
    EXPECT_EQ(model->frozen_checksum(), frozen);
    EXPECT_NE(model->parameters().checksum(), before);
    EXPECT_EQ(epoch_log_to_json(result.log).size(), 2u);
}

TEST(Training, SeedsAreIsolated) {
    const auto data_a = generate_synthetic(small_spec(), 1), data_b = generate_synthetic(small_spec(), 2);
    EXPECT_EQ(make_model(data_a, small_config(5))->parameters().checksum(),
              make_model(data_b, small_config(5))->parameters().checksum());
    EXPECT_NE(make_model(data_a, small_config(5))->parameters().checksum(),
              make_model(data_a, small_config(6))->parameters().checksum());
    EXPECT_NE(data_a.bags[0].bag.features.at(0, 0), data_b.bags[0].bag.features.at(0, 0));
}

TEST(Checkpoint, RoundTripReproducesMetrics) {
    TempDir dir("ckpt");
    const auto data = generate_synthetic(small_spec(), 1);
    auto model = make_model(data, small_config());
    train(*model, data.split(Split::train));
    save_checkpoint(dir / "model.json", *model);
    const auto loaded = load_checkpoint(dir / "model.json");
    EXPECT_EQ(loaded->parameters().checksum(), model->parameters().checksum());
    const auto test = data.split(Split::test);
    const auto a = evaluate(*model, test, 1), b = evaluate(*loaded, test, 1);
    EXPECT_EQ(a.predicted, b.predicted);
    EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
    const auto out_a = model->forward(test[0].features), out_b = loaded->forward(test[0].features);
    const auto pa = out_a.prediction.probs.values(), pb = out_b.prediction.probs.values();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i], pb[i]) << i;
}

TEST(Checkpoint, RejectsCorruptFiles) {
    TempDir dir("ckpt_bad");
    std::ofstream(dir / "bad.json") << R"({"format": "something else"})";
    EXPECT_THROW(load_checkpoint(dir / "bad.json"), Error);
    EXPECT_THROW(load_checkpoint(dir / "absent.json"), Error);
}

TEST(Evaluation, ThreadCountDoesNotChangeResults) {
    const auto data = generate_synthetic(small_spec(), 1);
    auto model = make_model(data, small_config());
    const auto test = data.split(Split::test);
    EXPECT_EQ(evaluate(*model, test, 1).predicted, evaluate(*model, test, 3).predicted);
}

TEST(Evaluation, FullSubsetMatchesFullBag) {
    const auto data = generate_synthetic(small_spec(), 1);
    auto model = make_model(data, small_config());
    const auto test = data.split(Split::test);
    EXPECT_EQ(evaluate_frame_subsets(*model, test, 8, InfluenceSelection::lowest).predicted,
              evaluate(*model, test, 1).predicted);
}

TEST(TrainFromManifest, WritesArtifactsAndChecksInputsFirst) {
    TempDir dir("run");
    const auto manifest = write_synthetic(generate_synthetic(small_spec(), 1), dir / "data");
    const auto run = train_from_manifest(manifest, small_config(), dir / "out");
    EXPECT_TRUE(std::filesystem::exists(run.checkpoint));
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "train_log.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "train_log.csv"));

    auto broken = manifest;
    write_bag(dir / "data" / "odd.tgfb", FrameBag{"odd", Tensor::zeros({8, 5}), 0});
    broken.bags.push_back({"odd.tgfb", Split::test});
    EXPECT_THROW(train_from_manifest(broken, small_config(), dir / "out2"), FormatError);
    EXPECT_FALSE(std::filesystem::exists(dir / "out2" / "checkpoint.json"));
}

TEST(Influence, CsvValuesAreNormalized) {
    const auto data = generate_synthetic(small_spec(), 1);
    auto model = make_model(data, small_config());
    const auto influences = compute_influence(*model, data.split(Split::test));
    const auto rows = influence_rows(influences);
    EXPECT_EQ(rows.size(), 9u * 8u);
    for (const auto& r : rows) {
        EXPECT_GE(r.normalized, 0.0);
        EXPECT_LE(r.normalized, 1.0);
    }
    std::ostringstream csv;
    write_influence_csv(csv, rows);
    const auto text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "bag_id,frame_index,raw,normalized");
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rows.size() + 1);
}

TEST(Influence, LocalizationScoreByHand) {
    std::vector<BagInfluence> influences{{"a", {{}, {1.0, 0.0, 0.5, 0.0}}}, {"b", {{}, {0.2, 0.2}}}};
    const SaliencyMasks masks{{"a", {1, 0, 1, 0}}, {"b", {1, 1}}};
    const auto s = localization_score(influences, masks);
    EXPECT_DOUBLE_EQ(s.score, 0.75);
    EXPECT_EQ(s.bags_scored, 1u);
    EXPECT_EQ(s.bags_skipped, 1u);
}

TEST(Influence, MissingMasksAreAnError) {
    std::vector<BagInfluence> influences{{"a", {{}, {1.0, 0.0}}}};
    EXPECT_THROW(localization_score(influences, {}), FormatError);
    EXPECT_THROW(localization_score(influences, {{"a", {1, 0, 0}}}), FormatError);
    TempDir dir("masks");
    EXPECT_THROW(load_masks(dir / "masks.json"), FormatError);
    save_masks(dir / "masks.json", {{"a", {1, 0}}});
    EXPECT_EQ(load_masks(dir / "masks.json").at("a"), (std::vector<std::uint8_t>{1, 0}));
}
