#include "tgdfer/optim.hpp"

#include <bit>

#include "tgdfer/errors.hpp"

namespace tgdfer {

std::string_view to_string(ParamGroup group) {
    switch (group) {
        case ParamGroup::temporal: return "temporal";
        case ParamGroup::prompts: return "prompts";
        case ParamGroup::head: return "head";
    }
    return "unknown";
}

void ParameterSet::add(std::string name, Tensor tensor, ParamGroup group) {
    if (!tensor.defined() || !tensor.requires_grad() || !tensor.is_leaf()) {
        throw GradientError("parameter '" + name + "' must be a leaf tensor that requires grad");
    }
    if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    entries_.push_back({std::move(name), group, std::move(tensor)});
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.tensor.numel();
    return n;
}

const Tensor& ParameterSet::at(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e.tensor;
    throw ConfigError("no parameter named '" + std::string(name) + "'");
}

bool ParameterSet::contains(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return true;
    return false;
}

void ParameterSet::zero_grad() {
    for (auto& e : entries_) e.tensor.zero_grad();
}

std::uint64_t ParameterSet::checksum() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& e : entries_) {
        for (char c : e.name) mix(static_cast<unsigned char>(c));
        for (auto extent : e.tensor.shape()) mix(extent);
        for (double v : e.tensor.values()) mix(std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

void sgd_step(ParameterSet& params, double lr) { sgd_step(params, GroupRates{lr, lr, lr}); }

void sgd_step(ParameterSet& params, const GroupRates& rates) {
    for (double r : rates)
        if (!(r >= 0.0)) throw ConfigError("learning rates must be non-negative");
    for (const auto& e : params)
        if (!e.tensor.has_grad()) throw GradientError("parameter '" + e.name + "' has no gradient");
    for (const auto& e : params) {
        Tensor t = e.tensor;
        const double lr = rates[static_cast<std::size_t>(e.group)];
        auto values = t.mutable_values();
        const auto g = t.grad();
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * g[i];
        t.zero_grad();
    }
}

}  // namespace tgdfer
