#include "hyperlat/optim.hpp"

#include <cmath>

#include "hyperlat/errors.hpp"

namespace hyperlat {

AdamW::AdamW(std::vector<Tensor> params, double lr_, double weight_decay_, double beta1,
             double beta2, double eps)
    : lr(lr_), weight_decay(weight_decay_), params_(std::move(params)),
      beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
        m_[i].assign(params_[i].numel(), 0.0);
        v_[i].assign(params_[i].numel(), 0.0);
    }
}

void AdamW::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i].data();
        const auto& g = params_[i].grad_view();
        for (size_t k = 0; k < p.size(); ++k) {
            const double gk = k < g.size() ? g[k] : 0.0;
            m_[i][k] = beta1_ * m_[i][k] + (1.0 - beta1_) * gk;
            v_[i][k] = beta2_ * v_[i][k] + (1.0 - beta2_) * gk * gk;
            const double mhat = m_[i][k] / bc1;
            const double vhat = v_[i][k] / bc2;
            p[k] -= lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay * p[k]);
        }
    }
}

void AdamW::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

double clip_global_norm(const std::vector<Tensor>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params)
        for (double g : p.grad_view()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (const auto& p : params) {
            auto pp = p;
            for (double& g : pp.grad()) g *= s;
        }
    }
    return norm;
}

void ema_update(const std::vector<Tensor>& teacher, const std::vector<Tensor>& student,
                double decay) {
    if (teacher.size() != student.size())
        throw InputError("ema_update: parameter lists differ in length");
    for (size_t i = 0; i < teacher.size(); ++i) {
        if (teacher[i].shape() != student[i].shape())
            throw InputError("ema_update: parameter shape mismatch at index " + std::to_string(i));
        auto t = teacher[i];
        auto& td = t.data();
        const auto& sd = student[i].data();
        for (size_t k = 0; k < td.size(); ++k) td[k] = decay * td[k] + (1.0 - decay) * sd[k];
    }
}

} // namespace hyperlat
