#include "hyperlat/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "hyperlat/errors.hpp"

namespace hyperlat {

namespace {

size_t numel_of(const std::vector<int64_t>& shape) {
    size_t n = 1;
    for (int64_t d : shape) n *= static_cast<size_t>(d);
    return n;
}

std::string shape_str(const std::vector<int64_t>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw InputError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

void require_rank2(const Tensor& a, const char* op) {
    if (a.rank() != 2) throw InputError(std::string(op) + ": expected rank 2, got " + shape_str(a.shape()));
}

using NodePtr = std::shared_ptr<Tensor::Node>;

NodePtr make_node(std::vector<int64_t> shape, std::vector<double> value) {
    auto n = std::make_shared<Tensor::Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    return n;
}

// Wires parents and the backward closure; output requires grad iff any
// parent does.
Tensor make_op(std::vector<int64_t> shape, std::vector<double> value,
               std::vector<Tensor> parents, std::function<void(Tensor::Node&)> backprop) {
    auto n = make_node(std::move(shape), std::move(value));
    bool rg = false;
    for (const auto& p : parents) {
        rg = rg || p.requires_grad();
        n->parents.push_back(p.node());
    }
    n->requires_grad = rg;
    if (rg) n->backprop = std::move(backprop);
    return Tensor(n);
}

std::vector<double>& grad_of(const NodePtr& n) {
    n->ensure_grad();
    return n->grad;
}

} // namespace

Tensor Tensor::zeros(std::vector<int64_t> shape) {
    const size_t n = numel_of(shape);
    return Tensor(make_node(std::move(shape), std::vector<double>(n, 0.0)));
}

Tensor Tensor::constant(std::vector<int64_t> shape, double v) {
    const size_t n = numel_of(shape);
    return Tensor(make_node(std::move(shape), std::vector<double>(n, v)));
}

Tensor Tensor::from(std::vector<int64_t> shape, std::vector<double> data) {
    if (numel_of(shape) != data.size())
        throw InputError("Tensor::from: data length does not match shape " + shape_str(shape));
    return Tensor(make_node(std::move(shape), std::move(data)));
}

double Tensor::scalar() const {
    if (numel() != 1) throw InputError("Tensor::scalar: tensor is not a scalar, shape " + shape_str(shape()));
    return node_->value[0];
}

void Tensor::backward() const {
    if (numel() != 1) throw InputError("backward: loss must be scalar, shape " + shape_str(shape()));

    // Topological order over the parent graph (iterative DFS).
    std::vector<Tensor::Node*> order;
    std::unordered_set<Tensor::Node*> seen;
    std::vector<std::pair<Tensor::Node*, size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Tensor::Node* p = n->parents[next++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
    return make_op(a.shape(), std::move(v), {a, b}, [an = a.node(), bn = b.node()](Tensor::Node& out) {
        if (an->requires_grad) {
            auto& g = grad_of(an);
            for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
        }
        if (bn->requires_grad) {
            auto& g = grad_of(bn);
            for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
        }
    });
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
    require_rank2(x, "add_rowvec");
    if (v.rank() != 1 || v.dim(0) != x.dim(1))
        throw InputError("add_rowvec: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(v.shape()));
    const size_t R = x.dim(0), C = x.dim(1);
    std::vector<double> out(x.numel());
    for (size_t r = 0; r < R; ++r)
        for (size_t c = 0; c < C; ++c) out[r * C + c] = x.data()[r * C + c] + v.data()[c];
    return make_op(x.shape(), std::move(out), {x, v}, [xn = x.node(), vn = v.node(), R, C](Tensor::Node& o) {
        if (xn->requires_grad) {
            auto& g = grad_of(xn);
            for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
        }
        if (vn->requires_grad) {
            auto& g = grad_of(vn);
            for (size_t r = 0; r < R; ++r)
                for (size_t c = 0; c < C; ++c) g[c] += o.grad[r * C + c];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] - b.data()[i];
    return make_op(a.shape(), std::move(v), {a, b}, [an = a.node(), bn = b.node()](Tensor::Node& out) {
        if (an->requires_grad) {
            auto& g = grad_of(an);
            for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
        }
        if (bn->requires_grad) {
            auto& g = grad_of(bn);
            for (size_t i = 0; i < g.size(); ++i) g[i] -= out.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
    return make_op(a.shape(), std::move(v), {a, b}, [an = a.node(), bn = b.node()](Tensor::Node& out) {
        if (an->requires_grad) {
            auto& g = grad_of(an);
            for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            auto& g = grad_of(bn);
            for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * an->value[i];
        }
    });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * s;
    return make_op(a.shape(), std::move(v), {a}, [an = a.node(), s](Tensor::Node& out) {
        auto& g = grad_of(an);
        for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * s;
    });
}

Tensor scale_rows(const Tensor& x, std::vector<double> row_scales) {
    require_rank2(x, "scale_rows");
    const size_t R = x.dim(0), C = x.dim(1);
    if (row_scales.size() != R) throw InputError("scale_rows: wrong number of row scales");
    std::vector<double> v(x.numel());
    for (size_t r = 0; r < R; ++r)
        for (size_t c = 0; c < C; ++c) v[r * C + c] = x.data()[r * C + c] * row_scales[r];
    return make_op(x.shape(), std::move(v), {x},
                   [xn = x.node(), s = std::move(row_scales), C](Tensor::Node& out) {
                       auto& g = grad_of(xn);
                       for (size_t r = 0; r < s.size(); ++r)
                           for (size_t c = 0; c < C; ++c) g[r * C + c] += out.grad[r * C + c] * s[r];
                   });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    if (a.dim(1) != b.dim(0))
        throw InputError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const size_t M = a.dim(0), K = a.dim(1), N = b.dim(1);
    std::vector<double> v(M * N, 0.0);
    for (size_t m = 0; m < M; ++m)
        for (size_t k = 0; k < K; ++k) {
            const double av = a.data()[m * K + k];
            if (av == 0.0) continue;
            const double* brow = &b.data()[k * N];
            double* vrow = &v[m * N];
            for (size_t n = 0; n < N; ++n) vrow[n] += av * brow[n];
        }
    return make_op({static_cast<int64_t>(M), static_cast<int64_t>(N)}, std::move(v), {a, b},
                   [an = a.node(), bn = b.node(), M, K, N](Tensor::Node& out) {
                       if (an->requires_grad) { // dA = dC Bᵀ
                           auto& g = grad_of(an);
                           for (size_t m = 0; m < M; ++m)
                               for (size_t k = 0; k < K; ++k) {
                                   double acc = 0.0;
                                   for (size_t n = 0; n < N; ++n)
                                       acc += out.grad[m * N + n] * bn->value[k * N + n];
                                   g[m * K + k] += acc;
                               }
                       }
                       if (bn->requires_grad) { // dB = Aᵀ dC
                           auto& g = grad_of(bn);
                           for (size_t k = 0; k < K; ++k)
                               for (size_t m = 0; m < M; ++m) {
                                   const double av = an->value[m * K + k];
                                   if (av == 0.0) continue;
                                   for (size_t n = 0; n < N; ++n)
                                       g[k * N + n] += av * out.grad[m * N + n];
                               }
                       }
                   });
}

Tensor transpose(const Tensor& a) {
    require_rank2(a, "transpose");
    const size_t R = a.dim(0), C = a.dim(1);
    std::vector<double> v(a.numel());
    for (size_t r = 0; r < R; ++r)
        for (size_t c = 0; c < C; ++c) v[c * R + r] = a.data()[r * C + c];
    return make_op({static_cast<int64_t>(C), static_cast<int64_t>(R)}, std::move(v), {a},
                   [an = a.node(), R, C](Tensor::Node& out) {
                       auto& g = grad_of(an);
                       for (size_t r = 0; r < R; ++r)
                           for (size_t c = 0; c < C; ++c) g[r * C + c] += out.grad[c * R + r];
                   });
}

Tensor outer(const Tensor& a, const Tensor& b) {
    if (a.rank() != 1 || b.rank() != 1) throw InputError("outer: expected two rank-1 tensors");
    const size_t M = a.dim(0), N = b.dim(0);
    std::vector<double> v(M * N);
    for (size_t m = 0; m < M; ++m)
        for (size_t n = 0; n < N; ++n) v[m * N + n] = a.data()[m] * b.data()[n];
    return make_op({static_cast<int64_t>(M), static_cast<int64_t>(N)}, std::move(v), {a, b},
                   [an = a.node(), bn = b.node(), M, N](Tensor::Node& out) {
                       if (an->requires_grad) {
                           auto& g = grad_of(an);
                           for (size_t m = 0; m < M; ++m)
                               for (size_t n = 0; n < N; ++n) g[m] += out.grad[m * N + n] * bn->value[n];
                       }
                       if (bn->requires_grad) {
                           auto& g = grad_of(bn);
                           for (size_t m = 0; m < M; ++m)
                               for (size_t n = 0; n < N; ++n) g[n] += out.grad[m * N + n] * an->value[m];
                       }
                   });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.data()) s += x;
    return make_op({1}, {s}, {a}, [an = a.node()](Tensor::Node& out) {
        auto& g = grad_of(an);
        for (double& x : g) x += out.grad[0];
    });
}

Tensor mean(const Tensor& a) {
    const double inv = 1.0 / static_cast<double>(a.numel());
    double s = 0.0;
    for (double x : a.data()) s += x;
    return make_op({1}, {s * inv}, {a}, [an = a.node(), inv](Tensor::Node& out) {
        auto& g = grad_of(an);
        for (double& x : g) x += out.grad[0] * inv;
    });
}

Tensor reshape(const Tensor& a, std::vector<int64_t> shape) {
    if (numel_of(shape) != a.numel())
        throw InputError("reshape: element count mismatch " + shape_str(a.shape()) + " vs " + shape_str(shape));
    return make_op(std::move(shape), a.data(), {a}, [an = a.node()](Tensor::Node& out) {
        auto& g = grad_of(an);
        for (size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require_rank2(a, "concat_cols");
    require_rank2(b, "concat_cols");
    if (a.dim(0) != b.dim(0))
        throw InputError("concat_cols: row mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const size_t R = a.dim(0), C1 = a.dim(1), C2 = b.dim(1);
    std::vector<double> v(R * (C1 + C2));
    for (size_t r = 0; r < R; ++r) {
        std::copy_n(&a.data()[r * C1], C1, &v[r * (C1 + C2)]);
        std::copy_n(&b.data()[r * C2], C2, &v[r * (C1 + C2) + C1]);
    }
    return make_op({static_cast<int64_t>(R), static_cast<int64_t>(C1 + C2)}, std::move(v), {a, b},
                   [an = a.node(), bn = b.node(), R, C1, C2](Tensor::Node& out) {
                       if (an->requires_grad) {
                           auto& g = grad_of(an);
                           for (size_t r = 0; r < R; ++r)
                               for (size_t c = 0; c < C1; ++c) g[r * C1 + c] += out.grad[r * (C1 + C2) + c];
                       }
                       if (bn->requires_grad) {
                           auto& g = grad_of(bn);
                           for (size_t r = 0; r < R; ++r)
                               for (size_t c = 0; c < C2; ++c)
                                   g[r * C2 + c] += out.grad[r * (C1 + C2) + C1 + c];
                       }
                   });
}

Tensor slice_cols(const Tensor& a, int64_t begin, int64_t end) {
    require_rank2(a, "slice_cols");
    if (begin < 0 || end > a.dim(1) || begin >= end)
        throw InputError("slice_cols: bad column range");
    const size_t R = a.dim(0), C = a.dim(1), W = end - begin;
    std::vector<double> v(R * W);
    for (size_t r = 0; r < R; ++r) std::copy_n(&a.data()[r * C + begin], W, &v[r * W]);
    return make_op({static_cast<int64_t>(R), static_cast<int64_t>(W)}, std::move(v), {a},
                   [an = a.node(), R, C, W, begin](Tensor::Node& out) {
                       auto& g = grad_of(an);
                       for (size_t r = 0; r < R; ++r)
                           for (size_t w = 0; w < W; ++w) g[r * C + begin + w] += out.grad[r * W + w];
                   });
}

Tensor relu(const Tensor& a) {
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    return make_op(a.shape(), std::move(v), {a}, [an = a.node()](Tensor::Node& out) {
        auto& g = grad_of(an);
        for (size_t i = 0; i < g.size(); ++i)
            if (an->value[i] > 0.0) g[i] += out.grad[i];
    });
}

Tensor gelu(const Tensor& a) {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) {
        const double x = a.data()[i];
        v[i] = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
    }
    return make_op(a.shape(), std::move(v), {a}, [an = a.node()](Tensor::Node& out) {
        auto& g = grad_of(an);
        for (size_t i = 0; i < g.size(); ++i) {
            const double x = an->value[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            g[i] += out.grad[i] * (cdf + x * pdf);
        }
    });
}

Tensor tanh_op(const Tensor& a) {
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(a.data()[i]);
    auto out = make_op(a.shape(), std::move(v), {a}, [an = a.node()](Tensor::Node& o) {
        auto& g = grad_of(an);
        for (size_t i = 0; i < g.size(); ++i) {
            const double t = o.value[i];
            g[i] += o.grad[i] * (1.0 - t * t);
        }
    });
    return out;
}

Tensor sigmoid_op(const Tensor& a) {
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::exp(-a.data()[i]));
    return make_op(a.shape(), std::move(v), {a}, [an = a.node()](Tensor::Node& o) {
        auto& g = grad_of(an);
        for (size_t i = 0; i < g.size(); ++i) {
            const double s = o.value[i];
            g[i] += o.grad[i] * s * (1.0 - s);
        }
    });
}

Tensor softmax_rows(const Tensor& a) {
    require_rank2(a, "softmax_rows");
    const size_t R = a.dim(0), C = a.dim(1);
    std::vector<double> v(a.numel());
    for (size_t r = 0; r < R; ++r) {
        double mx = a.data()[r * C];
        for (size_t c = 1; c < C; ++c) mx = std::max(mx, a.data()[r * C + c]);
        double z = 0.0;
        for (size_t c = 0; c < C; ++c) {
            v[r * C + c] = std::exp(a.data()[r * C + c] - mx);
            z += v[r * C + c];
        }
        for (size_t c = 0; c < C; ++c) v[r * C + c] /= z;
    }
    return make_op(a.shape(), std::move(v), {a}, [an = a.node(), R, C](Tensor::Node& o) {
        auto& g = grad_of(an);
        for (size_t r = 0; r < R; ++r) {
            double dot = 0.0;
            for (size_t c = 0; c < C; ++c) dot += o.grad[r * C + c] * o.value[r * C + c];
            for (size_t c = 0; c < C; ++c)
                g[r * C + c] += o.value[r * C + c] * (o.grad[r * C + c] - dot);
        }
    });
}

Tensor masked_fill(const Tensor& a, const std::vector<char>& mask, double fill) {
    if (mask.size() != a.numel()) throw InputError("masked_fill: mask length mismatch");
    std::vector<double> v(a.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = mask[i] ? fill : a.data()[i];
    return make_op(a.shape(), std::move(v), {a}, [an = a.node(), mask](Tensor::Node& o) {
        auto& g = grad_of(an);
        for (size_t i = 0; i < g.size(); ++i)
            if (!mask[i]) g[i] += o.grad[i];
    });
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    require_rank2(x, "layer_norm_rows");
    const size_t R = x.dim(0), C = x.dim(1);
    if (gamma.rank() != 1 || gamma.dim(0) != static_cast<int64_t>(C) || beta.rank() != 1 ||
        beta.dim(0) != static_cast<int64_t>(C))
        throw InputError("layer_norm_rows: affine shape mismatch with " + shape_str(x.shape()));

    std::vector<double> xhat(R * C), inv_sigma(R), v(R * C);
    for (size_t r = 0; r < R; ++r) {
        double mu = 0.0;
        for (size_t c = 0; c < C; ++c) mu += x.data()[r * C + c];
        mu /= static_cast<double>(C);
        double var = 0.0;
        for (size_t c = 0; c < C; ++c) {
            const double d = x.data()[r * C + c] - mu;
            var += d * d;
        }
        var /= static_cast<double>(C);
        inv_sigma[r] = 1.0 / std::sqrt(var + eps);
        for (size_t c = 0; c < C; ++c) {
            xhat[r * C + c] = (x.data()[r * C + c] - mu) * inv_sigma[r];
            v[r * C + c] = xhat[r * C + c] * gamma.data()[c] + beta.data()[c];
        }
    }
    return make_op(x.shape(), std::move(v), {x, gamma, beta},
                   [xn = x.node(), gn = gamma.node(), bn = beta.node(), xhat = std::move(xhat),
                    inv_sigma = std::move(inv_sigma), R, C](Tensor::Node& o) {
                       if (gn->requires_grad) {
                           auto& g = grad_of(gn);
                           for (size_t r = 0; r < R; ++r)
                               for (size_t c = 0; c < C; ++c) g[c] += o.grad[r * C + c] * xhat[r * C + c];
                       }
                       if (bn->requires_grad) {
                           auto& g = grad_of(bn);
                           for (size_t r = 0; r < R; ++r)
                               for (size_t c = 0; c < C; ++c) g[c] += o.grad[r * C + c];
                       }
                       if (xn->requires_grad) {
                           auto& g = grad_of(xn);
                           for (size_t r = 0; r < R; ++r) {
                               double m1 = 0.0, m2 = 0.0; // means of dxhat and dxhat∘xhat
                               for (size_t c = 0; c < C; ++c) {
                                   const double dxh = o.grad[r * C + c] * gn->value[c];
                                   m1 += dxh;
                                   m2 += dxh * xhat[r * C + c];
                               }
                               m1 /= static_cast<double>(C);
                               m2 /= static_cast<double>(C);
                               for (size_t c = 0; c < C; ++c) {
                                   const double dxh = o.grad[r * C + c] * gn->value[c];
                                   g[r * C + c] += inv_sigma[r] * (dxh - m1 - xhat[r * C + c] * m2);
                               }
                           }
                       }
                   });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& indices) {
    require_rank2(table, "embedding_lookup");
    const size_t R = table.dim(0), C = table.dim(1), N = indices.size();
    std::vector<double> v(N * C);
    for (size_t i = 0; i < N; ++i) {
        if (indices[i] < 0 || indices[i] >= static_cast<int>(R))
            throw InputError("embedding_lookup: index " + std::to_string(indices[i]) +
                             " out of range for table " + shape_str(table.shape()));
        std::copy_n(&table.data()[static_cast<size_t>(indices[i]) * C], C, &v[i * C]);
    }
    return make_op({static_cast<int64_t>(N), static_cast<int64_t>(C)}, std::move(v), {table},
                   [tn = table.node(), indices, C](Tensor::Node& o) {
                       auto& g = grad_of(tn);
                       for (size_t i = 0; i < indices.size(); ++i)
                           for (size_t c = 0; c < C; ++c)
                               g[static_cast<size_t>(indices[i]) * C + c] += o.grad[i * C + c];
                   });
}

Tensor dropout(const Tensor& x, double p, bool training, Rng rng) {
    if (!training || p <= 0.0) return x;
    if (p >= 1.0) throw InputError("dropout: p must be < 1");
    const double keep = 1.0 - p;
    std::vector<double> mask(x.numel());
    for (double& m : mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
    std::vector<double> v(x.numel());
    for (size_t i = 0; i < v.size(); ++i) v[i] = x.data()[i] * mask[i];
    return make_op(x.shape(), std::move(v), {x}, [xn = x.node(), mask = std::move(mask)](Tensor::Node& o) {
        auto& g = grad_of(xn);
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * mask[i];
    });
}

Tensor bce_with_logits_mean(const Tensor& logits, const std::vector<double>& targets) {
    if (logits.numel() != targets.size())
        throw InputError("bce_with_logits_mean: logits/targets length mismatch");
    const size_t N = targets.size();
    double loss = 0.0;
    for (size_t i = 0; i < N; ++i) {
        const double z = logits.data()[i], y = targets[i];
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
    loss /= static_cast<double>(N);
    return make_op({1}, {loss}, {logits}, [ln = logits.node(), targets, N](Tensor::Node& o) {
        auto& g = grad_of(ln);
        for (size_t i = 0; i < N; ++i) {
            const double s = 1.0 / (1.0 + std::exp(-ln->value[i]));
            g[i] += o.grad[0] * (s - targets[i]) / static_cast<double>(N);
        }
    });
}

Tensor cross_entropy_mean(const Tensor& logits, const std::vector<int>& labels) {
    require_rank2(logits, "cross_entropy_mean");
    const size_t N = logits.dim(0), C = logits.dim(1);
    if (labels.size() != N) throw InputError("cross_entropy_mean: labels length mismatch");
    double loss = 0.0;
    std::vector<double> probs(N * C);
    for (size_t i = 0; i < N; ++i) {
        if (labels[i] < 0 || labels[i] >= static_cast<int>(C))
            throw InputError("cross_entropy_mean: label out of range");
        double mx = logits.data()[i * C];
        for (size_t c = 1; c < C; ++c) mx = std::max(mx, logits.data()[i * C + c]);
        double z = 0.0;
        for (size_t c = 0; c < C; ++c) {
            probs[i * C + c] = std::exp(logits.data()[i * C + c] - mx);
            z += probs[i * C + c];
        }
        for (size_t c = 0; c < C; ++c) probs[i * C + c] /= z;
        loss += -std::log(std::max(probs[i * C + labels[i]], 1e-300));
    }
    loss /= static_cast<double>(N);
    return make_op({1}, {loss}, {logits},
                   [ln = logits.node(), labels, probs = std::move(probs), N, C](Tensor::Node& o) {
                       auto& g = grad_of(ln);
                       for (size_t i = 0; i < N; ++i)
                           for (size_t c = 0; c < C; ++c) {
                               const double delta = (static_cast<int>(c) == labels[i]) ? 1.0 : 0.0;
                               g[i * C + c] +=
                                   o.grad[0] * (probs[i * C + c] - delta) / static_cast<double>(N);
                           }
                   });
}

Tensor ParamStore::add(const std::string& name, Tensor t) {
    if (map_.count(name)) throw InputError("ParamStore: duplicate parameter name " + name);
    t.set_requires_grad(true);
    names_.push_back(name);
    map_.emplace(name, t);
    return t;
}

Tensor ParamStore::get(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end()) throw InputError("ParamStore: unknown parameter " + name);
    return it->second;
}

std::vector<Tensor> ParamStore::all() const {
    std::vector<Tensor> out;
    out.reserve(names_.size());
    for (const auto& n : names_) out.push_back(map_.at(n));
    return out;
}

void ParamStore::zero_grad() const {
    for (const auto& n : names_) map_.at(n).zero_grad();
}

size_t ParamStore::total_params() const {
    size_t n = 0;
    for (const auto& name : names_) n += map_.at(name).numel();
    return n;
}

Tensor xavier_uniform(std::vector<int64_t> shape, Rng& rng) {
    const double fan_in = static_cast<double>(shape.size() == 2 ? shape[0] : shape[0]);
    const double fan_out = static_cast<double>(shape.size() == 2 ? shape[1] : shape[0]);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    const size_t n = numel_of(shape);
    std::vector<double> data(n);
    for (double& x : data) x = (rng.uniform() * 2.0 - 1.0) * bound;
    return Tensor::from(std::move(shape), std::move(data));
}

Tensor normal_init(std::vector<int64_t> shape, Rng& rng, double stddev) {
    const size_t n = numel_of(shape);
    std::vector<double> data(n);
    for (double& x : data) x = rng.normal(0.0, stddev);
    return Tensor::from(std::move(shape), std::move(data));
}

} // namespace hyperlat
