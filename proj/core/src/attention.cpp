#include <cmath>
#include <string>

#include "ops_internal.hpp"
#include "tgdfer/ops.hpp"

namespace tgdfer {

using detail::Node;
using detail::NodePtr;

// Fused scaled-dot-product attention. Rows [b·L, (b+1)·L) form block b;
// columns [h·dh, (h+1)·dh) form head h. Blocks never attend to each other.
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            std::size_t block_len, AttentionTrace* trace) {
    detail::require_rank(q, 2, "multi_head_attention");
    if (k.shape() != q.shape() || v.shape() != q.shape()) {
        throw ShapeError("multi_head_attention: q, k, v shapes differ");
    }
    const std::size_t rows = q.dim(0), d = q.dim(1);
    if (heads == 0 || d % heads != 0) {
        throw ShapeError("multi_head_attention: width " + std::to_string(d) + " not divisible by " +
                         std::to_string(heads) + " heads");
    }
    if (block_len == 0 || rows % block_len != 0) {
        throw ShapeError("multi_head_attention: " + std::to_string(rows) + " rows do not split into blocks of " +
                         std::to_string(block_len));
    }
    const std::size_t blocks = rows / block_len, dh = d / heads, L = block_len;
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    // probs[((b * heads + h) * L + i) * L + j]
    std::vector<double> probs(blocks * heads * L * L);
    std::vector<double> out(rows * d, 0.0);
    const auto qv = q.values(), kv = k.values(), vv = v.values();
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t h = 0; h < heads; ++h) {
            double* p = probs.data() + (b * heads + h) * L * L;
            for (std::size_t i = 0; i < L; ++i) {
                const double* qi = qv.data() + (b * L + i) * d + h * dh;
                double mx = -INFINITY;
                for (std::size_t j = 0; j < L; ++j) {
                    const double* kj = kv.data() + (b * L + j) * d + h * dh;
                    double s = 0.0;
                    for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
                    p[i * L + j] = s * inv_scale;
                    mx = std::max(mx, p[i * L + j]);
                }
                double total = 0.0;
                for (std::size_t j = 0; j < L; ++j) {
                    p[i * L + j] = std::exp(p[i * L + j] - mx);
                    total += p[i * L + j];
                }
                double* oi = out.data() + (b * L + i) * d + h * dh;
                for (std::size_t j = 0; j < L; ++j) {
                    p[i * L + j] /= total;
                    const double* vj = vv.data() + (b * L + j) * d + h * dh;
                    for (std::size_t c = 0; c < dh; ++c) oi[c] += p[i * L + j] * vj[c];
                }
            }
        }
    }
    if (trace) {
        trace->weights.assign(blocks, std::vector<std::vector<double>>(heads));
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t h = 0; h < heads; ++h) {
                const auto first = probs.begin() + static_cast<std::ptrdiff_t>((b * heads + h) * L * L);
                trace->weights[b][h].assign(first, first + static_cast<std::ptrdiff_t>(L * L));
            }
    }

    NodePtr qn = q.node(), kn = k.node(), vn = v.node();
    return detail::record(
        {rows, d}, std::move(out), {q, k, v}, "multi_head_attention",
        [qn, kn, vn, probs = std::move(probs), blocks, heads, L, d, dh, inv_scale](Node& self) {
            std::vector<double> dp(L * L);
            auto gq = qn->requires_grad ? qn->grad_buffer() : std::span<double>{};
            auto gk = kn->requires_grad ? kn->grad_buffer() : std::span<double>{};
            auto gv = vn->requires_grad ? vn->grad_buffer() : std::span<double>{};
            const auto& go = self.grad;
            for (std::size_t b = 0; b < blocks; ++b) {
                for (std::size_t h = 0; h < heads; ++h) {
                    const double* p = probs.data() + (b * heads + h) * L * L;
                    auto at = [&](std::size_t row, std::size_t c) { return (b * L + row) * d + h * dh + c; };
                    // dP = dO V^T, dV = P^T dO
                    for (std::size_t i = 0; i < L; ++i) {
                        for (std::size_t j = 0; j < L; ++j) {
                            double s = 0.0;
                            for (std::size_t c = 0; c < dh; ++c) s += go[at(i, c)] * vn->values[at(j, c)];
                            dp[i * L + j] = s;
                            if (!gv.empty())
                                for (std::size_t c = 0; c < dh; ++c) gv[at(j, c)] += p[i * L + j] * go[at(i, c)];
                        }
                    }
                    // dS = P ⊙ (dP - rowsum(dP ⊙ P)), scaled back through 1/sqrt(dh)
                    for (std::size_t i = 0; i < L; ++i) {
                        double rs = 0.0;
                        for (std::size_t j = 0; j < L; ++j) rs += dp[i * L + j] * p[i * L + j];
                        for (std::size_t j = 0; j < L; ++j) {
                            const double ds = p[i * L + j] * (dp[i * L + j] - rs) * inv_scale;
                            if (ds == 0.0) continue;
                            for (std::size_t c = 0; c < dh; ++c) {
                                if (!gq.empty()) gq[at(i, c)] += ds * kn->values[at(j, c)];
                                if (!gk.empty()) gk[at(j, c)] += ds * qn->values[at(i, c)];
                            }
                        }
                    }
                }
            }
        });
}

}  // namespace tgdfer
