#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tgdfer/tensor.hpp"

// Differentiable operations. Every op records itself in the autograd graph
// whenever at least one input requires grad; otherwise the result is a
// plain constant tensor.
namespace tgdfer {

inline constexpr double kNormEpsilon = 1e-12;
inline constexpr double kLayerNormEpsilon = 1e-5;

enum class Activation { gelu, relu };

// [m×k]·[k×n] -> [m×n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
// x[m×n] + bias[n], bias broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);
// Row r of x[m×n] multiplied by the constant factors[r].
Tensor scale_rows(const Tensor& x, std::span<const double> factors);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// [m×n] -> [n], mean over the leading axis.
Tensor mean_rows(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);
// -log softmax(logits)[target] for logits of shape [C].
Tensor cross_entropy(const Tensor& logits, std::size_t target);

// Scalar cosine of two equal-length vectors.
Tensor cosine_similarity(const Tensor& u, const Tensor& v);
// Pairwise cosine of rows: a[m×d], b[n×d] -> [m×n].
Tensor cosine_rows(const Tensor& a, const Tensor& b);
// L2-normalises a vector, or each row of a matrix.
Tensor l2_normalize(const Tensor& x);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);
Tensor gelu(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor activate(const Tensor& x, Activation kind);

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);
// Flat element gather: out.values[i] = x.values[indices[i]].
Tensor gather(const Tensor& x, std::span<const std::size_t> indices, Shape out_shape);
// out[target_rows[i]] += src[i], out has out_rows rows.
Tensor scatter_add_rows(const Tensor& src, std::span<const std::size_t> target_rows,
                        std::size_t out_rows);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

// Softmax attention over independent blocks of `block_len` consecutive rows,
// split into `heads` column groups. q, k, v: [B·L × d].
struct AttentionTrace {
    // Per block, per head: [L×L] attention weights, rows sum to one.
    std::vector<std::vector<std::vector<double>>> weights;
};
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            std::size_t block_len, AttentionTrace* trace = nullptr);

}  // namespace tgdfer
