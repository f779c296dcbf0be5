#include "tgdfer/mil_head.hpp"

#include <algorithm>
#include <numeric>

#include "tgdfer/errors.hpp"
#include "tgdfer/ops.hpp"

namespace tgdfer {

std::string to_string(Aggregation aggregation) { return aggregation == Aggregation::mean ? "mean" : "topk"; }

Aggregation parse_aggregation(const std::string& text) {
    if (text == "mean") return Aggregation::mean;
    if (text == "topk") return Aggregation::topk;
    throw ConfigError("unknown aggregation '" + text + "' (expected mean or topk)");
}

namespace {

Tensor topk_mean(const Tensor& frame_sims, std::size_t k) {
    const std::size_t frames = frame_sims.dim(0), classes = frame_sims.dim(1);
    k = std::min(k, frames);
    std::vector<std::size_t> picked;
    picked.reserve(k * classes);
    std::vector<std::size_t> order(frames);
    for (std::size_t c = 0; c < classes; ++c) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return frame_sims.at(a, c) > frame_sims.at(b, c);
        });
        for (std::size_t i = 0; i < k; ++i) picked.push_back(order[i]);
    }
    // picked is class-major; lay it out as [k×C] for mean_rows.
    std::vector<std::size_t> flat(k * classes);
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t i = 0; i < k; ++i) flat[i * classes + c] = picked[c * k + i] * classes + c;
    return mean_rows(gather(frame_sims, flat, {k, classes}));
}

}  // namespace

BagPrediction predict_bag(const Tensor& x_instance, const Tensor& x_tilde, double tau, Aggregation aggregation,
                          std::size_t topk) {
    if (!(tau > 0.0)) throw ConfigError("prediction temperature must be positive");
    BagPrediction out;
    out.tau = tau;
    out.frame_sims = cosine_rows(x_instance, x_tilde);
    if (aggregation == Aggregation::topk) {
        if (topk == 0) throw ConfigError("top-k aggregation needs k >= 1");
        out.logits = topk_mean(out.frame_sims, topk);
    } else {
        out.logits = mean_rows(out.frame_sims);
    }
    out.probs = softmax(scale(out.logits, 1.0 / tau).detach(), 0);
    const auto p = out.probs.values();
    out.predicted = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    return out;
}

Tensor bag_loss(const BagPrediction& prediction, std::size_t label) {
    return cross_entropy(scale(prediction.logits, 1.0 / prediction.tau), label);
}

InfluenceProfile influence(const Tensor& frame_sims, std::size_t label) {
    if (frame_sims.rank() != 2) throw ShapeError("influence: frame similarities must be [T x C]");
    if (label >= frame_sims.dim(1)) {
        throw RangeError("influence: label " + std::to_string(label) + " outside [0, " +
                         std::to_string(frame_sims.dim(1)) + ")");
    }
    InfluenceProfile out;
    const std::size_t frames = frame_sims.dim(0);
    out.raw.resize(frames);
    for (std::size_t t = 0; t < frames; ++t) out.raw[t] = frame_sims.at(t, label);
    const auto [lo, hi] = std::minmax_element(out.raw.begin(), out.raw.end());
    const double span = *hi - *lo;
    out.normalized.resize(frames);
    for (std::size_t t = 0; t < frames; ++t) out.normalized[t] = span > 0.0 ? (out.raw[t] - *lo) / span : 0.5;
    return out;
}

InfluenceProfile influence(const BagPrediction& prediction) { return influence(prediction.frame_sims, prediction.predicted); }

std::vector<std::size_t> select_frames(const InfluenceProfile& profile, std::size_t k, InfluenceSelection which) {
    const std::size_t frames = profile.normalized.size();
    if (k == 0 || k > frames) {
        throw RangeError("select_frames: k = " + std::to_string(k) + " outside [1, " + std::to_string(frames) + "]");
    }
    std::vector<std::size_t> order(frames);
    std::iota(order.begin(), order.end(), 0);
    const auto& v = profile.normalized;
    if (which == InfluenceSelection::highest) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    } else {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    }
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

BagPrediction predict_topk(const Tensor& x_instance, const Tensor& x_tilde, double tau, const InfluenceProfile& profile,
                           std::size_t k, InfluenceSelection which) {
    if (profile.normalized.size() != x_instance.dim(0)) {
        throw ShapeError("predict_topk: influence profile length does not match the bag");
    }
    const auto frames = select_frames(profile, k, which);
    return predict_bag(gather_rows(x_instance, frames), x_tilde, tau);
}

}  // namespace tgdfer
