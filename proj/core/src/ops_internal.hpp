#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "tgdfer/errors.hpp"
#include "tgdfer/tensor.hpp"

namespace tgdfer::detail {

// Wraps freshly computed values in a tensor and, if any input needs a
// gradient, wires the node into the graph with the given backward rule.
inline Tensor record(Shape shape, std::vector<double> values, std::initializer_list<Tensor> inputs,
                     const char* op, std::function<void(Node&)> backward) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    bool needs_grad = false;
    for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
    if (needs_grad) {
        node->requires_grad = true;
        node->op = op;
        for (const auto& in : inputs) node->inputs.push_back(in.node());
        node->backward = std::move(backward);
    }
    return Tensor(std::move(node));
}

inline Tensor record(Shape shape, std::vector<double> values, const std::vector<Tensor>& inputs, const char* op,
                     std::function<void(Node&)> backward) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    bool needs_grad = false;
    for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
    if (needs_grad) {
        node->requires_grad = true;
        node->op = op;
        for (const auto& in : inputs) node->inputs.push_back(in.node());
        node->backward = std::move(backward);
    }
    return Tensor(std::move(node));
}

inline void require_rank(const Tensor& t, std::size_t rank, const char* op) {
    if (!t.defined()) throw Error(std::string(op) + ": undefined tensor");
    if (t.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_to_string(t.shape()));
    }
}

}  // namespace tgdfer::detail
