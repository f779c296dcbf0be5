#include "tgdfer/trainer.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <thread>

#include "tgdfer/autograd.hpp"
#include "tgdfer/checkpoint.hpp"
#include "tgdfer/errors.hpp"

namespace tgdfer {

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566;

void check_bags(const TgdferModel& model, const std::vector<FrameBag>& bags) {
    for (const auto& bag : bags) {
        if (bag.dim() != model.feature_dim()) {
            throw ShapeError("bag " + bag.bag_id + " has dimension " + std::to_string(bag.dim()) + ", model expects " +
                             std::to_string(model.feature_dim()));
        }
        if (bag.label >= model.class_count()) throw RangeError("bag " + bag.bag_id + " has an out-of-range label");
        model.config().temporal.segmentation.validate(bag.frames());
        if (bag.frames() > model.config().temporal.max_frames) {
            throw ShapeError("bag " + bag.bag_id + " exceeds max_frames");
        }
    }
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += threads) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

std::size_t thread_budget() {
    if (const char* env = std::getenv("TGDFER_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("TGDFER_THREADS must be a positive integer, got '") + env + "'");
    }
    return 1;
}

nlohmann::json epoch_log_to_json(const std::vector<EpochLog>& log) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : log) {
        out.push_back({{"epoch", e.epoch},
                       {"loss", e.loss},
                       {"train_war", e.train_war},
                       {"train_uar", e.train_uar},
                       {"lr",
                        {{"temporal", e.lrs[static_cast<std::size_t>(ParamGroup::temporal)]},
                         {"prompts", e.lrs[static_cast<std::size_t>(ParamGroup::prompts)]},
                         {"head", e.lrs[static_cast<std::size_t>(ParamGroup::head)]}}}});
    }
    return out;
}

TrainResult train(TgdferModel& model, const std::vector<FrameBag>& bags,
                  const std::function<void(const EpochLog&)>& on_epoch) {
    if (bags.empty()) throw ConfigError("training split is empty");
    check_bags(model, bags);
    const auto& config = model.config();
    Rng shuffle_rng = make_rng(config.seed, kShuffleStream);
    std::vector<std::size_t> order(bags.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    auto& params = model.parameters();
    params.zero_grad();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const GroupRates rates = lr_at(epoch, config);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::vector<std::size_t> truth, predicted;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            std::sort(batch.begin(), batch.end());
            const double weight = 1.0 / static_cast<double>(batch.size());
            for (auto index : batch) {
                const auto& bag = bags[index];
                const auto out = model.forward(bag.features);
                const Tensor loss = model.loss(out, bag.label);
                loss_sum += loss.item();
                truth.push_back(bag.label);
                predicted.push_back(out.prediction.predicted);
                backward(scale(loss, weight));
            }
            sgd_step(params, rates);
        }
        const auto report = score_predictions(truth, predicted, model.class_count());
        EpochLog entry{epoch, loss_sum / static_cast<double>(bags.size()), report.war, report.uar, rates};
        result.log.push_back(entry);
        if (on_epoch) on_epoch(entry);
    }
    result.final_loss = result.log.back().loss;
    return result;
}

double mean_loss(const TgdferModel& model, const std::vector<FrameBag>& bags) {
    if (bags.empty()) throw ConfigError("cannot average a loss over no bags");
    double total = 0.0;
    for (const auto& bag : bags) total += model.loss(model.forward(bag.features), bag.label).item();
    return total / static_cast<double>(bags.size());
}

Evaluation evaluate(const TgdferModel& model, const std::vector<FrameBag>& bags, std::size_t threads) {
    check_bags(model, bags);
    if (threads == 0) threads = thread_budget();
    Evaluation out;
    out.predicted.resize(bags.size());
    parallel_for(bags.size(), threads,
                 [&](std::size_t i) { out.predicted[i] = model.forward(bags[i].features).prediction.predicted; });
    std::vector<std::size_t> truth;
    for (const auto& bag : bags) truth.push_back(bag.label);
    out.report = score_predictions(truth, out.predicted, model.class_count());
    return out;
}

Evaluation evaluate_frame_subsets(const TgdferModel& model, const std::vector<FrameBag>& bags, std::size_t k,
                                  InfluenceSelection which) {
    check_bags(model, bags);
    Evaluation out;
    out.predicted.resize(bags.size());
    parallel_for(bags.size(), thread_budget(), [&](std::size_t i) {
        const auto full = model.forward(bags[i].features);
        const auto profile = influence(full.prediction.frame_sims, bags[i].label);
        out.predicted[i] = predict_topk(full.instance.x_instance, full.labels.x_tilde, model.config().tau_p, profile,
                                        k, which)
                               .predicted;
    });
    std::vector<std::size_t> truth;
    for (const auto& bag : bags) truth.push_back(bag.label);
    out.report = score_predictions(truth, out.predicted, model.class_count());
    return out;
}

TrainRun train_from_manifest(const DatasetManifest& manifest, const TrainConfig& config,
                             const std::filesystem::path& out_dir) {
    const auto train_bags = manifest.load_split(Split::train);
    const auto test_bags = manifest.load_split(Split::test);
    if (train_bags.empty() || test_bags.empty()) throw ConfigError("manifest needs non-empty train and test splits");

    TgdferModel model(config, manifest.feature_dim, manifest.class_names, manifest.fine_descriptors);
    check_bags(model, train_bags);
    check_bags(model, test_bags);
    const auto frozen_before = model.frozen_checksum();

    TrainRun run;
    run.result = train(model, train_bags);
    if (model.frozen_checksum() != frozen_before) throw Error("frozen encoder weights changed during training");

    std::filesystem::create_directories(out_dir);
    run.checkpoint = out_dir / "checkpoint.json";
    save_checkpoint(run.checkpoint, model);
    {
        std::ofstream log_json(out_dir / "train_log.json");
        log_json << epoch_log_to_json(run.result.log).dump(2) << '\n';
    }
    {
        std::ofstream csv(out_dir / "train_log.csv");
        csv.precision(17);
        csv << "epoch,loss,train_war,train_uar,lr_temporal,lr_prompts,lr_head\n";
        for (const auto& e : run.result.log) {
            csv << e.epoch << ',' << e.loss << ',' << e.train_war << ',' << e.train_uar << ',' << e.lrs[0] << ','
                << e.lrs[1] << ',' << e.lrs[2] << '\n';
        }
    }
    return run;
}

}  // namespace tgdfer
