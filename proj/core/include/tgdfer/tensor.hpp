#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tgdfer {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the autograd graph. Leaves have no inputs and no backward
// function; interior nodes propagate `grad` into their inputs' grads.
struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until a backward pass reaches the node
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<NodePtr> inputs;
    std::function<void(Node&)> backward;

    // Allocates (zeroed) on first use.
    std::span<double> grad_buffer();
};

}  // namespace detail

// Dense row-major fp64 tensor. Copies share storage (handle semantics), the
// same way a graph edge refers to its producer.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor vector(std::vector<double> values, bool requires_grad = false);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                         bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> values() const;
    // Writable view of a leaf's storage; throws on interior nodes so that
    // recorded activations can't be mutated behind the graph's back.
    std::span<double> mutable_values();
    double item() const;
    double at(std::size_t i) const;
    double at(std::size_t row, std::size_t col) const;

    bool requires_grad() const;
    bool is_leaf() const;
    bool has_grad() const;
    std::span<const double> grad() const;
    void accumulate_grad(std::span<const double> delta);
    void zero_grad();

    // Same values, no graph history, no grad.
    Tensor detach() const;
    Tensor clone(bool requires_grad = false) const;

    const detail::NodePtr& node() const { return node_; }
    explicit Tensor(detail::NodePtr node) : node_(std::move(node)) {}

private:
    detail::NodePtr node_;
};

}  // namespace tgdfer
