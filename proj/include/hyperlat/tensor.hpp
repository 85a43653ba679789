#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperlat/errors.hpp"
#include "hyperlat/rng.hpp"

namespace hyperlat {

// Dense 64-bit float tensor with a reverse-mode tape. A Tensor is a shared
// handle to its node; ops build the backward graph implicitly. Gradients
// accumulate (sum) across uses and across backward() calls until zero_grad.
// Rank 1 and 2 only; no implicit broadcasting (explicit row-vector ops
// instead).
class Tensor {
public:
    struct Node {
        std::vector<int64_t> shape;
        std::vector<double> value;
        std::vector<double> grad; // allocated on demand, same length as value
        bool requires_grad = false;
        std::vector<std::shared_ptr<Node>> parents;
        std::function<void(Node&)> backprop;

        size_t numel() const { return value.size(); }
        void ensure_grad() { if (grad.size() != value.size()) grad.assign(value.size(), 0.0); }
    };

    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor zeros(std::vector<int64_t> shape);
    static Tensor constant(std::vector<int64_t> shape, double v);
    static Tensor from(std::vector<int64_t> shape, std::vector<double> data);
    static Tensor scalar_of(double v) { return from({1}, {v}); }

    bool defined() const { return node_ != nullptr; }
    const std::vector<int64_t>& shape() const { return node_->shape; }
    int64_t dim(size_t i) const { return node_->shape[i]; }
    size_t rank() const { return node_->shape.size(); }
    size_t numel() const { return node_->numel(); }

    std::vector<double>& data() { return node_->value; }
    const std::vector<double>& data() const { return node_->value; }
    std::vector<double>& grad() { node_->ensure_grad(); return node_->grad; }
    const std::vector<double>& grad_view() const { return node_->grad; }
    double grad_at(size_t i) const { return node_->grad.empty() ? 0.0 : node_->grad[i]; }

    bool requires_grad() const { return node_->requires_grad; }
    const Tensor& set_requires_grad(bool b) const { node_->requires_grad = b; return *this; }
    void zero_grad() const {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
    }

    double scalar() const; // requires numel() == 1

    // Reverse pass from a scalar. Seeds d(this)/d(this) = 1 and accumulates
    // into every reachable node that requires grad.
    void backward() const;

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// ---- elementwise and linear algebra ----
Tensor add(const Tensor& a, const Tensor& b);            // same shape
Tensor add_rowvec(const Tensor& x, const Tensor& v);     // [R,C] + [C] per row
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);            // elementwise
Tensor scale(const Tensor& a, double s);
Tensor scale_rows(const Tensor& x, std::vector<double> row_scales); // constant scales
Tensor matmul(const Tensor& a, const Tensor& b);         // [m,k]×[k,n]
Tensor transpose(const Tensor& a);                       // [m,n] → [n,m]
Tensor outer(const Tensor& a, const Tensor& b);          // [m]⊗[n] → [m,n]

// ---- reductions ----
Tensor sum(const Tensor& a);   // → [1]
Tensor mean(const Tensor& a);  // → [1]

// ---- shape ----
Tensor reshape(const Tensor& a, std::vector<int64_t> shape);
Tensor concat_cols(const Tensor& a, const Tensor& b);    // [R,C1]‖[R,C2]
Tensor slice_cols(const Tensor& a, int64_t begin, int64_t end);

// ---- nonlinearities ----
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor sigmoid_op(const Tensor& a);

// ---- rows/softmax/norm ----
Tensor softmax_rows(const Tensor& a);                            // [R,C]
Tensor masked_fill(const Tensor& a, const std::vector<char>& mask, double v);
Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       double eps = 1e-5);

// ---- lookup / selection ----
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& indices); // [N,C]
inline Tensor gather_rows(const Tensor& x, const std::vector<int>& rows) {
    return embedding_lookup(x, rows);
}

// Inverted dropout; identity when not training. The caller passes a derived
// stream so disabling dropout does not perturb any other draw.
Tensor dropout(const Tensor& x, double p, bool training, Rng rng);

// ---- losses ----
Tensor bce_with_logits_mean(const Tensor& logits, const std::vector<double>& targets);
Tensor cross_entropy_mean(const Tensor& logits, const std::vector<int>& labels);

// ---- parameter registry ----
// Insertion-ordered named parameters; the ordering fixes optimizer-state
// pairing and checkpoint layout.
class ParamStore {
public:
    Tensor add(const std::string& name, Tensor t);
    Tensor get(const std::string& name) const;
    bool has(const std::string& name) const { return map_.count(name) > 0; }
    const std::vector<std::string>& names() const { return names_; }
    std::vector<Tensor> all() const;
    void zero_grad() const;
    size_t total_params() const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Tensor> map_;
};

// ---- initializers ----
Tensor xavier_uniform(std::vector<int64_t> shape, Rng& rng);
Tensor normal_init(std::vector<int64_t> shape, Rng& rng, double stddev);

} // namespace hyperlat
