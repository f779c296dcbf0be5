#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tgdfer/tensor.hpp"

namespace tgdfer {

// How per-frame class similarities reduce to one bag logit per class.
enum class Aggregation { mean, topk };
std::string to_string(Aggregation aggregation);
Aggregation parse_aggregation(const std::string& text);

struct BagPrediction {
    Tensor frame_sims;  // [T×C] cos(x_instance[t], x_tilde[k])
    Tensor logits;      // [C]
    Tensor probs;       // [C] softmax(logits / tau)
    std::size_t predicted = 0;
    double tau = 1.0;
};

// Mean (or top-k mean) over frames of cosine similarity to each enhanced
// label feature, softmax at temperature tau.
BagPrediction predict_bag(const Tensor& x_instance, const Tensor& x_tilde, double tau,
                          Aggregation aggregation = Aggregation::mean, std::size_t topk = 2);

// Cross-entropy on logits / tau, in fused log-softmax form.
Tensor bag_loss(const BagPrediction& prediction, std::size_t label);

struct InfluenceProfile {
    std::vector<double> raw;         // frame_sims[t, class]
    std::vector<double> normalized;  // min-max scaled to [0, 1]; constant raw maps to 0.5
};

InfluenceProfile influence(const Tensor& frame_sims, std::size_t label);
// Unlabelled inference: the predicted class column.
InfluenceProfile influence(const BagPrediction& prediction);

enum class InfluenceSelection { highest, lowest };

// k frame indices ranked by normalized influence, ties to the lower index,
// returned in ascending frame order.
std::vector<std::size_t> select_frames(const InfluenceProfile& profile, std::size_t k, InfluenceSelection which);

BagPrediction predict_topk(const Tensor& x_instance, const Tensor& x_tilde, double tau,
                           const InfluenceProfile& profile, std::size_t k, InfluenceSelection which);

}  // namespace tgdfer
