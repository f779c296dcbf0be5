#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgdfer/bag_io.hpp"
#include "tgdfer/manifest.hpp"
#include "tgdfer/metrics.hpp"
#include "tgdfer/model.hpp"

namespace tgdfer {

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;       // mean bag loss seen while training this epoch
    double train_war = 0.0;  // from the same running predictions
    double train_uar = 0.0;
    GroupRates lrs{};
};

struct TrainResult {
    std::vector<EpochLog> log;
    double final_loss = 0.0;
};

nlohmann::json epoch_log_to_json(const std::vector<EpochLog>& log);

// Mini-batch SGD over a fixed seeded shuffle. Within a batch, bag gradients
// accumulate in ascending bag index; the batch loss is the mean bag loss.
TrainResult train(TgdferModel& model, const std::vector<FrameBag>& bags,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Mean bag loss without updating anything.
double mean_loss(const TgdferModel& model, const std::vector<FrameBag>& bags);

struct Evaluation {
    EvalReport report;
    std::vector<std::size_t> predicted;
};

// Threads: 0 reads TGDFER_THREADS (default 1).
Evaluation evaluate(const TgdferModel& model, const std::vector<FrameBag>& bags, std::size_t threads = 0);

// Inference restricted to the k highest- or lowest-influence frames of each
// bag, influence taken from the full bag against its ground-truth label.
Evaluation evaluate_frame_subsets(const TgdferModel& model, const std::vector<FrameBag>& bags, std::size_t k,
                                  InfluenceSelection which);

std::size_t thread_budget();

struct TrainRun {
    TrainResult result;
    std::filesystem::path checkpoint;
};

// Loads and validates both splits before the first epoch, trains, and writes
// checkpoint.json plus train_log.{json,csv} into out_dir.
TrainRun train_from_manifest(const DatasetManifest& manifest, const TrainConfig& config,
                             const std::filesystem::path& out_dir);

}  // namespace tgdfer
