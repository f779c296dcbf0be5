#pragma once

#include <span>
#include <vector>

#include "tgdfer/tensor.hpp"

namespace tgdfer {

// Topologically ordered record of the operations that produced a scalar
// loss: every node appears after all nodes producing its inputs.
class Tape {
public:
    static Tape record(const Tensor& loss);

    std::span<const detail::NodePtr> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and walks the record in reverse. Leaf grads
    // accumulate additively across calls.
    void backward();

private:
    explicit Tape(std::vector<detail::NodePtr> nodes) : nodes_(std::move(nodes)) {}
    std::vector<detail::NodePtr> nodes_;
};

void backward(const Tensor& loss);

}  // namespace tgdfer
