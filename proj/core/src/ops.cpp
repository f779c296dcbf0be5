#include "tgdfer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ops_internal.hpp"

namespace tgdfer {

using detail::Node;
using detail::NodePtr;
using detail::record;
using detail::require_rank;

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double checked_norm(const double* x, std::size_t n, const char* op) {
    const double norm = std::sqrt(dot(x, x, n));
    if (!(norm > kNormEpsilon)) {
        throw DegenerateVectorError(std::string(op) + ": vector norm " + std::to_string(norm) +
                                    " is at or below 1e-12");
    }
    return norm;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner extents differ for " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
    }
    std::vector<double> out(m * n, 0.0);
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < m; ++i) {
        double* row = out.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            const double* brow = bv.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
        }
    }
    NodePtr an = a.node(), bn = b.node();
    return record({m, n}, std::move(out), {a, b}, "matmul", [an, bn, m, k, n](Node& self) {
        const auto& g = self.grad;
        if (an->requires_grad) {
            auto ga = an->grad_buffer();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    ga[i * k + p] += dot(g.data() + i * n, bn->values.data() + p * n, n);
                }
            }
        }
        if (bn->requires_grad) {
            auto gb = bn->grad_buffer();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = an->values[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
                }
            }
        }
    });
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose");
    const std::size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> out(m * n);
    const auto av = a.values();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
    NodePtr an = a.node();
    return record({n, m}, std::move(out), {a}, "transpose", [an, m, n](Node& self) {
        auto ga = an->grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[j * m + i];
    });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw ShapeError("reshape: cannot view " + shape_to_string(a.shape()) + " as " + shape_to_string(shape));
    }
    std::vector<double> out(a.values().begin(), a.values().end());
    NodePtr an = a.node();
    return record(std::move(shape), std::move(out), {a}, "reshape", [an](Node& self) {
        auto ga = an->grad_buffer();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
    NodePtr an = a.node(), bn = b.node();
    return record(a.shape(), std::move(out), {a, b}, "add", [an, bn](Node& self) {
        for (const auto& in : {an, bn}) {
            if (!in->requires_grad) continue;
            auto g = in->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
    NodePtr an = a.node(), bn = b.node();
    return record(a.shape(), std::move(out), {a, b}, "sub", [an, bn](Node& self) {
        if (an->requires_grad) {
            auto g = an->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (bn->requires_grad) {
            auto g = bn->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    NodePtr an = a.node(), bn = b.node();
    return record(a.shape(), std::move(out), {a, b}, "mul", [an, bn](Node& self) {
        if (an->requires_grad) {
            auto g = an->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bn->values[i];
        }
        if (bn->requires_grad) {
            auto g = bn->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * an->values[i];
        }
    });
}

Tensor scale(const Tensor& a, double factor) {
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * factor;
    NodePtr an = a.node();
    return record(a.shape(), std::move(out), {a}, "scale", [an, factor](Node& self) {
        auto g = an->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
    });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    require_rank(x, 2, "add_bias");
    require_rank(bias, 1, "add_bias");
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (bias.dim(0) != n) {
        throw ShapeError("add_bias: bias " + shape_to_string(bias.shape()) + " does not fit " +
                         shape_to_string(x.shape()));
    }
    std::vector<double> out(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias.values()[j];
    NodePtr xn = x.node(), bn = bias.node();
    return record(x.shape(), std::move(out), {x, bias}, "add_bias", [xn, bn, m, n](Node& self) {
        if (xn->requires_grad) {
            auto g = xn->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (bn->requires_grad) {
            auto g = bn->grad_buffer();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
        }
    });
}

Tensor scale_rows(const Tensor& x, std::span<const double> factors) {
    require_rank(x, 2, "scale_rows");
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (factors.size() != m) throw ShapeError("scale_rows: need one factor per row");
    std::vector<double> f(factors.begin(), factors.end());
    std::vector<double> out(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= f[i];
    NodePtr xn = x.node();
    return record(x.shape(), std::move(out), {x}, "scale_rows", [xn, f = std::move(f), n](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < f.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i * n + j] * f[i];
    });
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    NodePtr xn = x.node();
    return record({1}, {s}, {x}, "sum", [xn](Node& self) {
        auto g = xn->grad_buffer();
        for (auto& gi : g) gi += self.grad[0];
    });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mean_rows(const Tensor& x) {
    require_rank(x, 2, "mean_rows");
    const std::size_t m = x.dim(0), n = x.dim(1);
    const double inv = 1.0 / static_cast<double>(m);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += x.values()[i * n + j];
    for (auto& v : out) v *= inv;
    NodePtr xn = x.node();
    return record({n}, std::move(out), {x}, "mean_rows", [xn, m, n, inv](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j] * inv;
    });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    const auto& shape = x.shape();
    if (axis >= shape.size()) {
        throw ShapeError("softmax: axis " + std::to_string(axis) + " invalid for " + shape_to_string(shape));
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
    const std::size_t len = shape[axis];
    const auto xv = x.values();
    std::vector<double> out(xv.size());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * len * inner + in;
            double mx = xv[base];
            for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, xv[base + j * inner]);
            double total = 0.0;
            for (std::size_t j = 0; j < len; ++j) {
                const double e = std::exp(xv[base + j * inner] - mx);
                out[base + j * inner] = e;
                total += e;
            }
            for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= total;
        }
    }
    NodePtr xn = x.node();
    return record(shape, std::move(out), {x}, "softmax", [xn, outer, inner, len](Node& self) {
        auto g = xn->grad_buffer();
        const auto& y = self.values;
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t base = o * len * inner + in;
                double s = 0.0;
                for (std::size_t j = 0; j < len; ++j) s += self.grad[base + j * inner] * y[base + j * inner];
                for (std::size_t j = 0; j < len; ++j) {
                    const std::size_t idx = base + j * inner;
                    g[idx] += y[idx] * (self.grad[idx] - s);
                }
            }
        }
    });
}

Tensor cross_entropy(const Tensor& logits, std::size_t target) {
    require_rank(logits, 1, "cross_entropy");
    const std::size_t c = logits.dim(0);
    if (target >= c) {
        throw RangeError("cross_entropy: target " + std::to_string(target) + " outside [0, " + std::to_string(c) +
                         ")");
    }
    const auto lv = logits.values();
    const double mx = *std::max_element(lv.begin(), lv.end());
    double total = 0.0;
    for (double v : lv) total += std::exp(v - mx);
    const double log_z = mx + std::log(total);
    NodePtr ln = logits.node();
    return record({1}, {log_z - lv[target]}, {logits}, "cross_entropy", [ln, log_z, target](Node& self) {
        auto g = ln->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double p = std::exp(ln->values[i] - log_z);
            g[i] += self.grad[0] * (p - (i == target ? 1.0 : 0.0));
        }
    });
}

Tensor cosine_similarity(const Tensor& u, const Tensor& v) {
    if (u.numel() != v.numel()) {
        throw ShapeError("cosine_similarity: length mismatch " + shape_to_string(u.shape()) + " vs " +
                         shape_to_string(v.shape()));
    }
    const std::size_t n = u.numel();
    const double nu = checked_norm(u.values().data(), n, "cosine_similarity");
    const double nv = checked_norm(v.values().data(), n, "cosine_similarity");
    const double c = dot(u.values().data(), v.values().data(), n) / (nu * nv);
    NodePtr un = u.node(), vn = v.node();
    return record({1}, {c}, {u, v}, "cosine_similarity", [un, vn, nu, nv, c, n](Node& self) {
        const double g = self.grad[0];
        if (un->requires_grad) {
            auto gu = un->grad_buffer();
            for (std::size_t i = 0; i < n; ++i)
                gu[i] += g * (vn->values[i] / (nu * nv) - c * un->values[i] / (nu * nu));
        }
        if (vn->requires_grad) {
            auto gv = vn->grad_buffer();
            for (std::size_t i = 0; i < n; ++i)
                gv[i] += g * (un->values[i] / (nu * nv) - c * vn->values[i] / (nv * nv));
        }
    });
}

Tensor l2_normalize(const Tensor& x) {
    if (x.rank() != 1 && x.rank() != 2) throw ShapeError("l2_normalize: expected a vector or a matrix");
    const std::size_t n = x.shape().back();
    const std::size_t rows = x.numel() / n;
    std::vector<double> norms(rows);
    std::vector<double> out(x.values().begin(), x.values().end());
    for (std::size_t r = 0; r < rows; ++r) {
        norms[r] = checked_norm(out.data() + r * n, n, "l2_normalize");
        for (std::size_t j = 0; j < n; ++j) out[r * n + j] /= norms[r];
    }
    NodePtr xn = x.node();
    return record(x.shape(), std::move(out), {x}, "l2_normalize", [xn, norms = std::move(norms), n](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t r = 0; r < norms.size(); ++r) {
            const double* y = self.values.data() + r * n;
            const double* gy = self.grad.data() + r * n;
            const double proj = dot(gy, y, n);
            for (std::size_t j = 0; j < n; ++j) g[r * n + j] += (gy[j] - proj * y[j]) / norms[r];
        }
    });
}

Tensor cosine_rows(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "cosine_rows");
    require_rank(b, 2, "cosine_rows");
    if (a.dim(1) != b.dim(1)) {
        throw ShapeError("cosine_rows: width mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
    }
    return matmul(l2_normalize(a), transpose(l2_normalize(b)));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
    if (x.rank() < 1) throw ShapeError("layer_norm: scalar input");
    const std::size_t d = x.shape().back();
    if (d < 2) throw ShapeError("layer_norm: last axis must have at least 2 entries");
    if (gain.numel() != d || bias.numel() != d) {
        throw ShapeError("layer_norm: gain/bias must have " + std::to_string(d) + " entries");
    }
    const std::size_t rows = x.numel() / d;
    std::vector<double> xhat(x.numel()), inv_std(rows), out(x.numel());
    const auto xv = x.values();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = xv.data() + r * d;
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += row[j];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= static_cast<double>(d);
        inv_std[r] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        for (std::size_t j = 0; j < d; ++j) {
            xhat[r * d + j] = (row[j] - mu) * inv_std[r];
            out[r * d + j] = xhat[r * d + j] * gain.values()[j] + bias.values()[j];
        }
    }
    NodePtr xn = x.node(), gn = gain.node(), bn = bias.node();
    return record(x.shape(), std::move(out), {x, gain, bias}, "layer_norm",
                  [xn, gn, bn, xhat = std::move(xhat), inv_std = std::move(inv_std), d, rows](Node& self) {
                      const auto& gy = self.grad;
                      if (gn->requires_grad) {
                          auto g = gn->grad_buffer();
                          for (std::size_t r = 0; r < rows; ++r)
                              for (std::size_t j = 0; j < d; ++j) g[j] += gy[r * d + j] * xhat[r * d + j];
                      }
                      if (bn->requires_grad) {
                          auto g = bn->grad_buffer();
                          for (std::size_t r = 0; r < rows; ++r)
                              for (std::size_t j = 0; j < d; ++j) g[j] += gy[r * d + j];
                      }
                      if (xn->requires_grad) {
                          auto g = xn->grad_buffer();
                          const double inv_d = 1.0 / static_cast<double>(d);
                          for (std::size_t r = 0; r < rows; ++r) {
                              double mean_dh = 0.0, mean_dh_h = 0.0;
                              for (std::size_t j = 0; j < d; ++j) {
                                  const double dh = gy[r * d + j] * gn->values[j];
                                  mean_dh += dh;
                                  mean_dh_h += dh * xhat[r * d + j];
                              }
                              mean_dh *= inv_d;
                              mean_dh_h *= inv_d;
                              for (std::size_t j = 0; j < d; ++j) {
                                  const double dh = gy[r * d + j] * gn->values[j];
                                  g[r * d + j] += inv_std[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
                              }
                          }
                      }
                  });
}

Tensor gelu(const Tensor& x) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x.values()[i];
        out[i] = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
    }
    NodePtr xn = x.node();
    return record(x.shape(), std::move(out), {x}, "gelu", [xn, inv_sqrt_2pi](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = xn->values[i];
            const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
            const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
            g[i] += self.grad[i] * (cdf + v * pdf);
        }
    });
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, x.values()[i]);
    NodePtr xn = x.node();
    return record(x.shape(), std::move(out), {x}, "relu", [xn](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (xn->values[i] > 0.0) g[i] += self.grad[i];
    });
}

Tensor activate(const Tensor& x, Activation kind) { return kind == Activation::gelu ? gelu(x) : relu(x); }

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
    require_rank(x, 2, "slice_rows");
    if (count == 0 || start + count > x.dim(0)) {
        throw RangeError("slice_rows: rows [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") outside " + shape_to_string(x.shape()));
    }
    const std::size_t n = x.dim(1);
    std::vector<double> out(x.values().begin() + static_cast<std::ptrdiff_t>(start * n),
                            x.values().begin() + static_cast<std::ptrdiff_t>((start + count) * n));
    NodePtr xn = x.node();
    return record({count, n}, std::move(out), {x}, "slice_rows", [xn, start, n](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[start * n + i] += self.grad[i];
    });
}

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count) {
    require_rank(x, 2, "slice_cols");
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (count == 0 || start + count > n) throw RangeError("slice_cols: columns out of range");
    std::vector<double> out(m * count);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < count; ++j) out[i * count + j] = x.values()[i * n + start + j];
    NodePtr xn = x.node();
    return record({m, count}, std::move(out), {x}, "slice_cols", [xn, start, count, m, n](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < count; ++j) g[i * n + start + j] += self.grad[i * count + j];
    });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
    require_rank(x, 2, "gather_rows");
    if (rows.empty()) throw RangeError("gather_rows: empty index list");
    const std::size_t m = x.dim(0), n = x.dim(1);
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    std::vector<double> out(idx.size() * n);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= m) throw RangeError("gather_rows: row " + std::to_string(idx[i]) + " out of range");
        std::copy_n(x.values().begin() + static_cast<std::ptrdiff_t>(idx[i] * n), n, out.begin() +
                    static_cast<std::ptrdiff_t>(i * n));
    }
    NodePtr xn = x.node();
    const std::size_t count = idx.size();
    return record({count, n}, std::move(out), {x}, "gather_rows", [xn, idx = std::move(idx), n](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) g[idx[i] * n + j] += self.grad[i * n + j];
    });
}

Tensor gather(const Tensor& x, std::span<const std::size_t> indices, Shape out_shape) {
    if (shape_numel(out_shape) != indices.size()) throw ShapeError("gather: output shape does not match indices");
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.numel()) throw RangeError("gather: index out of range");
        out[i] = x.values()[idx[i]];
    }
    NodePtr xn = x.node();
    return record(std::move(out_shape), std::move(out), {x}, "gather", [xn, idx = std::move(idx)](Node& self) {
        auto g = xn->grad_buffer();
        for (std::size_t i = 0; i < idx.size(); ++i) g[idx[i]] += self.grad[i];
    });
}

Tensor scatter_add_rows(const Tensor& src, std::span<const std::size_t> target_rows, std::size_t out_rows) {
    require_rank(src, 2, "scatter_add_rows");
    const std::size_t m = src.dim(0), n = src.dim(1);
    if (target_rows.size() != m) throw ShapeError("scatter_add_rows: need one target per source row");
    if (out_rows == 0) throw ShapeError("scatter_add_rows: empty output");
    std::vector<std::size_t> idx(target_rows.begin(), target_rows.end());
    std::vector<double> out(out_rows * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (idx[i] >= out_rows) throw RangeError("scatter_add_rows: target row out of range");
        for (std::size_t j = 0; j < n; ++j) out[idx[i] * n + j] += src.values()[i * n + j];
    }
    NodePtr sn = src.node();
    return record({out_rows, n}, std::move(out), {src}, "scatter_add_rows", [sn, idx = std::move(idx), n](Node& self) {
        auto g = sn->grad_buffer();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[idx[i] * n + j];
    });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
    const std::size_t n = parts.front().shape().back();
    std::size_t rows = 0;
    std::vector<std::size_t> offsets;
    std::vector<double> out;
    for (const auto& p : parts) {
        if (p.rank() > 2 || p.shape().back() != n) {
            throw ShapeError("concat_rows: part " + shape_to_string(p.shape()) + " has width other than " +
                             std::to_string(n));
        }
        offsets.push_back(out.size());
        out.insert(out.end(), p.values().begin(), p.values().end());
        rows += p.numel() / n;
    }
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    return record({rows, n}, std::move(out), parts, "concat_rows",
                  [nodes = std::move(nodes), offsets = std::move(offsets)](Node& self) {
                      for (std::size_t k = 0; k < nodes.size(); ++k) {
                          if (!nodes[k]->requires_grad) continue;
                          auto g = nodes[k]->grad_buffer();
                          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[k] + i];
                      }
                  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
    const std::size_t m = parts.front().dim(0);
    std::vector<std::size_t> widths, col_offsets;
    std::size_t total = 0;
    for (const auto& p : parts) {
        require_rank(p, 2, "concat_cols");
        if (p.dim(0) != m) throw ShapeError("concat_cols: row counts differ");
        col_offsets.push_back(total);
        widths.push_back(p.dim(1));
        total += p.dim(1);
    }
    std::vector<double> out(m * total);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto pv = parts[k].values();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < widths[k]; ++j) out[i * total + col_offsets[k] + j] = pv[i * widths[k] + j];
    }
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    return record({m, total}, std::move(out), parts, "concat_cols",
                  [nodes = std::move(nodes), widths = std::move(widths), col_offsets = std::move(col_offsets), m,
                   total](Node& self) {
                      for (std::size_t k = 0; k < nodes.size(); ++k) {
                          if (!nodes[k]->requires_grad) continue;
                          auto g = nodes[k]->grad_buffer();
                          for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t j = 0; j < widths[k]; ++j)
                                  g[i * widths[k] + j] += self.grad[i * total + col_offsets[k] + j];
                      }
                  });
}

}  // namespace tgdfer
