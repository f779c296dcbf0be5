#include "tgdfer/autograd.hpp"

#include <unordered_set>
#include <utility>

#include "tgdfer/errors.hpp"

namespace tgdfer {

using detail::Node;
using detail::NodePtr;

Tape Tape::record(const Tensor& loss) {
    if (!loss.defined()) throw GradientError("backward on an undefined tensor");
    if (loss.numel() != 1) {
        throw GradientError("backward needs a scalar loss, got shape " + shape_to_string(loss.shape()));
    }
    std::vector<NodePtr> order;
    if (!loss.requires_grad()) return Tape(std::move(order));

    // Iterative post-order DFS; inputs are visited in declaration order so the
    // resulting order is a pure function of the graph.
    std::unordered_set<const Node*> visited;
    std::vector<std::pair<NodePtr, std::size_t>> stack;
    stack.emplace_back(loss.node(), 0);
    visited.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            NodePtr child = node->inputs[next++];
            if (child->requires_grad && visited.insert(child.get()).second) stack.emplace_back(std::move(child), 0);
        } else {
            order.push_back(std::move(node));
            stack.pop_back();
        }
    }
    return Tape(std::move(order));
}

void Tape::backward() {
    if (nodes_.empty()) return;
    // Interior grads are transient; only leaves keep accumulating.
    for (const auto& n : nodes_)
        if (!n->inputs.empty()) n->grad.assign(n->values.size(), 0.0);
    nodes_.back()->grad_buffer()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node& n = **it;
        if (n.backward) n.backward(n);
    }
    for (const auto& n : nodes_)
        if (!n->inputs.empty()) {
            n->grad.clear();
            n->grad.shrink_to_fit();
        }
}

void backward(const Tensor& loss) { Tape::record(loss).backward(); }

}  // namespace tgdfer
