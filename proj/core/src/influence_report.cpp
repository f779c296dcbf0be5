#include "tgdfer/influence_report.hpp"

#include <cstdio>
#include <fstream>

#include "tgdfer/errors.hpp"

namespace tgdfer {

std::vector<BagInfluence> compute_influence(const TgdferModel& model, const std::vector<FrameBag>& bags) {
    std::vector<BagInfluence> out;
    out.reserve(bags.size());
    for (const auto& bag : bags) {
        const auto output = model.forward(bag.features);
        out.push_back({bag.bag_id, influence(output.prediction.frame_sims, bag.label)});
    }
    return out;
}

std::vector<InfluenceRow> influence_rows(const std::vector<BagInfluence>& influences) {
    std::vector<InfluenceRow> rows;
    for (const auto& bag : influences)
        for (std::size_t t = 0; t < bag.profile.raw.size(); ++t)
            rows.push_back({bag.bag_id, t, bag.profile.raw[t], bag.profile.normalized[t]});
    return rows;
}

void write_influence_csv(std::ostream& out, const std::vector<InfluenceRow>& rows) {
    out << "bag_id,frame_index,raw,normalized\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.bag_id << ',' << r.frame_index << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.raw);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.normalized);
        out << buf << '\n';
    }
}

void write_influence_csv(const std::filesystem::path& path, const std::vector<InfluenceRow>& rows) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    write_influence_csv(out, rows);
}

LocalizationScore localization_score(const std::vector<BagInfluence>& influences, const SaliencyMasks& masks) {
    LocalizationScore result;
    double total = 0.0;
    for (const auto& bag : influences) {
        const auto it = masks.find(bag.bag_id);
        if (it == masks.end()) throw FormatError("missing saliency mask for bag " + bag.bag_id);
        const auto& mask = it->second;
        const auto& values = bag.profile.normalized;
        if (mask.size() != values.size()) {
            throw FormatError("saliency mask for bag " + bag.bag_id + " has " + std::to_string(mask.size()) +
                              " entries, bag has " + std::to_string(values.size()) + " frames");
        }
        double on = 0.0, off = 0.0;
        std::size_t n_on = 0, n_off = 0;
        for (std::size_t t = 0; t < values.size(); ++t) {
            if (mask[t]) {
                on += values[t];
                ++n_on;
            } else {
                off += values[t];
                ++n_off;
            }
        }
        if (n_on == 0 || n_off == 0) {
            ++result.bags_skipped;
            continue;
        }
        total += on / static_cast<double>(n_on) - off / static_cast<double>(n_off);
        ++result.bags_scored;
    }
    if (result.bags_scored > 0) result.score = total / static_cast<double>(result.bags_scored);
    return result;
}

}  // namespace tgdfer
