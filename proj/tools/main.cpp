#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tgdfer/checkpoint.hpp"
#include "tgdfer/diagnostics.hpp"
#include "tgdfer/errors.hpp"
#include "tgdfer/influence_report.hpp"
#include "tgdfer/manifest.hpp"
#include "tgdfer/synthetic.hpp"
#include "tgdfer/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw tgdfer::FormatError("cannot write " + path.string());
    out << text;
}

void check_compatible(const tgdfer::TgdferModel& model, const tgdfer::DatasetManifest& manifest) {
    if (model.schema_hash() != manifest.schema_hash()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "checkpoint label space %016llx does not match manifest %016llx",
                      static_cast<unsigned long long>(model.schema_hash()),
                      static_cast<unsigned long long>(manifest.schema_hash()));
        throw tgdfer::ConfigError(buf);
    }
}

int cmd_gen_synthetic(const std::optional<fs::path>& spec_path, std::uint64_t seed, const fs::path& out) {
    const auto spec = spec_path ? tgdfer::SyntheticSpec::load(*spec_path) : tgdfer::SyntheticSpec{};
    const auto data = tgdfer::generate_synthetic(spec, seed);
    const auto manifest = tgdfer::write_synthetic(data, out);
    std::cout << json{{"manifest", (out / "manifest.json").string()},
                      {"masks", (out / "masks.json").string()},
                      {"train_bags", manifest.count(tgdfer::Split::train)},
                      {"test_bags", manifest.count(tgdfer::Split::test)}}
                     .dump(2)
              << '\n';
    return 0;
}

int cmd_train(const fs::path& manifest_path, const std::optional<fs::path>& config_path,
              std::optional<std::uint64_t> seed, const fs::path& out) {
    const auto manifest = tgdfer::DatasetManifest::load(manifest_path);
    auto config = config_path ? tgdfer::TrainConfig::load(*config_path) : tgdfer::TrainConfig{};
    if (seed) config.seed = *seed;
    const auto run = tgdfer::train_from_manifest(manifest, config, out);
    const auto& last = run.result.log.back();
    std::cout << json{{"checkpoint", run.checkpoint.string()},
                      {"epochs", run.result.log.size()},
                      {"final_loss", run.result.final_loss},
                      {"train_war", last.train_war},
                      {"train_uar", last.train_uar}}
                     .dump(2)
              << '\n';
    return 0;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& manifest_path, const std::string& split,
             std::size_t frames, const std::string& select, const std::optional<fs::path>& out) {
    const auto manifest = tgdfer::DatasetManifest::load(manifest_path);
    const auto model = tgdfer::load_checkpoint(checkpoint);
    check_compatible(*model, manifest);
    const auto bags = manifest.load_split(tgdfer::parse_split(split));
    if (bags.empty()) throw tgdfer::ConfigError("split '" + split + "' has no bags");
    tgdfer::Evaluation result;
    if (frames == 0) {
        result = tgdfer::evaluate(*model, bags);
    } else {
        if (select != "highest" && select != "lowest") throw tgdfer::ConfigError("--select must be highest or lowest");
        const auto which = select == "highest" ? tgdfer::InfluenceSelection::highest : tgdfer::InfluenceSelection::lowest;
        result = tgdfer::evaluate_frame_subsets(*model, bags, frames, which);
    }
    auto doc = result.report.to_json(model->class_names());
    doc["split"] = split;
    doc["bags"] = bags.size();
    if (frames > 0) doc["frames"] = {{"k", frames}, {"select", select}};
    if (out) {
        fs::create_directories(*out);
        write_text(*out / "metrics.json", doc.dump(2) + "\n");
        write_text(*out / "confusion.csv", result.report.confusion_csv(model->class_names()));
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int cmd_influence(const fs::path& checkpoint, const fs::path& manifest_path, const std::string& split, bool localize,
                  const std::optional<fs::path>& masks_path, const fs::path& out) {
    const auto manifest = tgdfer::DatasetManifest::load(manifest_path);
    const auto model = tgdfer::load_checkpoint(checkpoint);
    check_compatible(*model, manifest);
    const auto bags = manifest.load_split(tgdfer::parse_split(split));
    // Masks are read before any work so a missing file fails fast.
    std::optional<tgdfer::SaliencyMasks> masks;
    if (localize) masks = tgdfer::load_masks(masks_path ? *masks_path : manifest.base_dir / "masks.json");

    const auto influences = tgdfer::compute_influence(*model, bags);
    fs::create_directories(out);
    const auto csv = out / "influence.csv";
    tgdfer::write_influence_csv(csv, tgdfer::influence_rows(influences));
    json doc{{"influence_csv", csv.string()}, {"split", split}, {"bags", bags.size()}};
    if (masks) {
        const auto score = tgdfer::localization_score(influences, *masks);
        json loc{{"score", score.score}, {"bags_scored", score.bags_scored}, {"bags_skipped", score.bags_skipped}};
        write_text(out / "localization.json", loc.dump(2) + "\n");
        doc["localization"] = loc;
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int cmd_gradcheck(bool full_pipeline, double tolerance) {
    const auto cases = tgdfer::run_gradcheck_suite(full_pipeline);
    bool ok = true;
    json doc = json::array();
    for (const auto& c : cases) {
        const bool passed = c.report.passed(tolerance);
        ok = ok && passed;
        json entries = json::array();
        for (const auto& e : c.report.entries)
            entries.push_back({{"name", e.name}, {"numel", e.numel}, {"relative_error", e.relative_error},
                               {"absolute_error", e.absolute_error}});
        doc.push_back({{"case", c.name},
                       {"max_relative_error", c.report.max_relative_error()},
                       {"passed", passed},
                       {"parameters", entries}});
    }
    std::cout << doc.dump(2) << '\n';
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-grained temporal MIL with text-guided label features"};
    app.require_subcommand(1);

    std::optional<fs::path> spec_path, config_path, masks_path, eval_out;
    std::uint64_t gen_seed = 0;
    std::optional<std::uint64_t> train_seed;
    fs::path out, manifest, checkpoint;
    std::string split = "test", select = "highest";
    std::size_t frames = 0;
    bool localize = false, full_pipeline = false;
    double tolerance = 1e-4;

    auto* gen = app.add_subcommand("gen-synthetic", "Write a planted-salient-frame dataset");
    gen->add_option("--spec", spec_path, "Synthetic spec JSON (defaults when omitted)")->check(CLI::ExistingFile);
    gen->add_option("--seed", gen_seed, "Data seed")->required();
    gen->add_option("--out", out, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Train a model and write checkpoint.json");
    train->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    train->add_option("--config", config_path, "Training config JSON")->check(CLI::ExistingFile);
    train->add_option("--seed", train_seed, "Overrides the config seed");
    train->add_option("--out", out, "Output directory")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
    eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
    eval->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    eval->add_option("--split", split)->check(CLI::IsMember({"train", "test"}));
    eval->add_option("--frames", frames, "Restrict inference to k influence-selected frames");
    eval->add_option("--select", select, "highest or lowest (with --frames)");
    eval->add_option("--out", eval_out, "Also write metrics.json and confusion.csv here");

    auto* infl = app.add_subcommand("influence", "Per-frame influence CSV and localization score");
    infl->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
    infl->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    infl->add_option("--split", split)->check(CLI::IsMember({"train", "test"}));
    infl->add_flag("--localize", localize, "Score against saliency masks");
    infl->add_option("--masks", masks_path, "Masks JSON (default: masks.json beside the manifest)");
    infl->add_option("--out", out, "Output directory")->default_val(".");

    auto* grad = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    grad->add_flag("--full-pipeline", full_pipeline, "Check the whole model end to end");
    grad->add_option("--tolerance", tolerance, "Maximum relative error")->default_val(1e-4);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) return cmd_gen_synthetic(spec_path, gen_seed, out);
        if (*train) return cmd_train(manifest, config_path, train_seed, out);
        if (*eval) return cmd_eval(checkpoint, manifest, split, frames, select, eval_out);
        if (*infl) return cmd_influence(checkpoint, manifest, split, localize, masks_path, out);
        if (*grad) return cmd_gradcheck(full_pipeline, tolerance);
    } catch (const std::exception& e) {
        std::cerr << "tgdfer: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
