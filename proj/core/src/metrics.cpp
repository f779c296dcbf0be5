#include "tgdfer/metrics.hpp"

#include <sstream>

#include "tgdfer/errors.hpp"

namespace tgdfer {

std::size_t EvalReport::total() const {
    std::size_t n = 0;
    for (const auto& row : confusion)
        for (auto v : row) n += v;
    return n;
}

EvalReport report_from_confusion(ConfusionMatrix confusion) {
    const std::size_t classes = confusion.size();
    for (const auto& row : confusion)
        if (row.size() != classes) throw ShapeError("confusion matrix must be square");
    EvalReport r;
    r.confusion = std::move(confusion);
    r.per_class_recall.resize(classes);
    std::size_t correct = 0, total = 0, present = 0;
    double recall_sum = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
        std::size_t row_total = 0;
        for (auto v : r.confusion[k]) row_total += v;
        correct += r.confusion[k][k];
        total += row_total;
        if (row_total > 0) {
            const double recall = static_cast<double>(r.confusion[k][k]) / static_cast<double>(row_total);
            r.per_class_recall[k] = recall;
            recall_sum += recall;
            ++present;
        }
    }
    r.war = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    r.uar = present ? recall_sum / static_cast<double>(present) : 0.0;
    return r;
}

EvalReport score_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                             std::size_t classes) {
    if (truth.size() != predicted.size()) throw ShapeError("truth and prediction counts differ");
    ConfusionMatrix m(classes, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= classes || predicted[i] >= classes) throw RangeError("class index out of range");
        ++m[truth[i]][predicted[i]];
    }
    return report_from_confusion(std::move(m));
}

nlohmann::json EvalReport::to_json(const std::vector<std::string>& class_names) const {
    nlohmann::json recalls = nlohmann::json::array();
    for (const auto& r : per_class_recall) recalls.push_back(r ? nlohmann::json(*r) : nlohmann::json(nullptr));
    nlohmann::json out = {{"war", war}, {"uar", uar}, {"total", total()}, {"per_class_recall", recalls},
                          {"confusion", confusion}};
    if (!class_names.empty()) out["class_names"] = class_names;
    return out;
}

std::string EvalReport::confusion_csv(const std::vector<std::string>& class_names) const {
    auto name = [&](std::size_t k) { return k < class_names.size() ? class_names[k] : std::to_string(k); };
    std::ostringstream out;
    out << "true\\predicted";
    for (std::size_t k = 0; k < confusion.size(); ++k) out << ',' << name(k);
    out << '\n';
    for (std::size_t k = 0; k < confusion.size(); ++k) {
        out << name(k);
        for (auto v : confusion[k]) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

}  // namespace tgdfer
