#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tgdfer {

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;  // rows = true class

struct EvalReport {
    ConfusionMatrix confusion;
    double war = 0.0;  // trace / total
    double uar = 0.0;  // mean recall over classes that have true instances
    std::vector<std::optional<double>> per_class_recall;  // empty for absent classes

    std::size_t total() const;
    nlohmann::json to_json(const std::vector<std::string>& class_names = {}) const;
    std::string confusion_csv(const std::vector<std::string>& class_names = {}) const;
};

EvalReport report_from_confusion(ConfusionMatrix confusion);
EvalReport score_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                             std::size_t classes);

}  // namespace tgdfer
