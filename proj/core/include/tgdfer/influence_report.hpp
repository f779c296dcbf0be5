#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tgdfer/bag_io.hpp"
#include "tgdfer/model.hpp"
#include "tgdfer/synthetic.hpp"

namespace tgdfer {

struct InfluenceRow {
    std::string bag_id;
    std::size_t frame_index = 0;
    double raw = 0.0;
    double normalized = 0.0;
};

struct BagInfluence {
    std::string bag_id;
    InfluenceProfile profile;
};

// Ground-truth-class influence for every bag.
std::vector<BagInfluence> compute_influence(const TgdferModel& model, const std::vector<FrameBag>& bags);

std::vector<InfluenceRow> influence_rows(const std::vector<BagInfluence>& influences);
// Columns: bag_id,frame_index,raw,normalized.
void write_influence_csv(std::ostream& out, const std::vector<InfluenceRow>& rows);
void write_influence_csv(const std::filesystem::path& path, const std::vector<InfluenceRow>& rows);

struct LocalizationScore {
    double score = 0.0;
    std::size_t bags_scored = 0;   // bags with both salient and non-salient frames
    std::size_t bags_skipped = 0;
};

// Mean over bags of (mean normalized influence on salient frames − mean on
// the rest). Throws FormatError when a bag has no mask or a mask of the
// wrong length.
LocalizationScore localization_score(const std::vector<BagInfluence>& influences, const SaliencyMasks& masks);

}  // namespace tgdfer
