#include "tgdfer/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "tgdfer/errors.hpp"

namespace tgdfer {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto extent : shape) n *= extent;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << "x";
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::span<double> detail::Node::grad_buffer() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
    return grad;
}

namespace {

void check_shape(const Shape& shape, std::size_t count) {
    for (auto extent : shape) {
        if (extent == 0) throw ShapeError("tensor extents must be positive, got " + shape_to_string(shape));
    }
    if (shape_numel(shape) != count) {
        throw ShapeError("shape " + shape_to_string(shape) + " does not match " + std::to_string(count) +
                         " values");
    }
}

const detail::Node& require(const detail::NodePtr& node) {
    if (!node) throw Error("use of an undefined tensor");
    return *node;
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const auto n = shape_numel(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape, values.size());
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
    const auto n = values.size();
    return from({n}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad) {
    return from({rows, cols}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const { return require(node_).shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_to_string(s));
    }
    return s[axis];
}

std::size_t Tensor::numel() const { return require(node_).values.size(); }

std::span<const double> Tensor::values() const { return require(node_).values; }

std::span<double> Tensor::mutable_values() {
    require(node_);
    if (!node_->inputs.empty()) throw Error("cannot mutate the values of a recorded operation");
    return node_->values;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_to_string(shape()));
    return node_->values[0];
}

double Tensor::at(std::size_t i) const {
    if (i >= numel()) throw RangeError("flat index " + std::to_string(i) + " out of range");
    return node_->values[i];
}

double Tensor::at(std::size_t row, std::size_t col) const {
    if (rank() != 2) throw ShapeError("at(row, col) on tensor of shape " + shape_to_string(shape()));
    if (row >= dim(0) || col >= dim(1)) throw RangeError("matrix index out of range");
    return node_->values[row * dim(1) + col];
}

bool Tensor::requires_grad() const { return require(node_).requires_grad; }

bool Tensor::is_leaf() const { return require(node_).inputs.empty(); }

bool Tensor::has_grad() const { return !require(node_).grad.empty(); }

std::span<const double> Tensor::grad() const {
    if (!has_grad()) throw GradientError("tensor has no gradient");
    return node_->grad;
}

void Tensor::accumulate_grad(std::span<const double> delta) {
    require(node_);
    if (delta.size() != node_->values.size()) throw ShapeError("gradient size does not match tensor");
    auto g = node_->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

void Tensor::zero_grad() {
    require(node_);
    node_->grad.clear();
}

Tensor Tensor::detach() const { return clone(false); }

Tensor Tensor::clone(bool requires_grad) const {
    const auto& n = require(node_);
    return from(n.shape, n.values, requires_grad);
}

}  // namespace tgdfer
