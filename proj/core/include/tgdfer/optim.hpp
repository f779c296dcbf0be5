#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tgdfer/tensor.hpp"

namespace tgdfer {

// Learning-rate groups; the prompts group trains at a lower rate.
enum class ParamGroup : std::uint8_t { temporal = 0, prompts = 1, head = 2 };
inline constexpr std::size_t kParamGroupCount = 3;
std::string_view to_string(ParamGroup group);

struct NamedParameter {
    std::string name;
    ParamGroup group;
    Tensor tensor;
};

// Insertion-ordered, uniquely named learnable tensors.
class ParameterSet {
public:
    void add(std::string name, Tensor tensor, ParamGroup group = ParamGroup::head);

    const std::vector<NamedParameter>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t scalar_count() const;
    const Tensor& at(std::string_view name) const;
    bool contains(std::string_view name) const;

    void zero_grad();
    // FNV-1a over names, shapes and value bits.
    std::uint64_t checksum() const;

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    std::vector<NamedParameter> entries_;
};

using GroupRates = std::array<double, kParamGroupCount>;

// p <- p - lr * grad(p) for every parameter, then clears grads. Throws
// GradientError if some parameter has no grad.
void sgd_step(ParameterSet& params, double lr);
void sgd_step(ParameterSet& params, const GroupRates& rates);

}  // namespace tgdfer
