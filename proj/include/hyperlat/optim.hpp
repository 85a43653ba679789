#pragma once

#include <vector>

#include "hyperlat/tensor.hpp"

namespace hyperlat {

// AdamW with decoupled weight decay. Moment buffers are paired with the
// parameter list positionally, so the caller must pass the same list (same
// order) on every step.
class AdamW {
public:
    AdamW(std::vector<Tensor> params, double lr, double weight_decay,
          double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step();
    void zero_grad();

    double lr = 0.0;
    double weight_decay = 0.0;

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    double beta1_, beta2_, eps_;
    long long t_ = 0;
};

// Scales all gradients by max_norm/‖g‖₂ when the global norm exceeds
// max_norm. Returns the pre-clip norm.
double clip_global_norm(const std::vector<Tensor>& params, double max_norm);

// θ_teacher ← decay·θ_teacher + (1−decay)·θ_student, elementwise.
void ema_update(const std::vector<Tensor>& teacher, const std::vector<Tensor>& student,
                double decay);

} // namespace hyperlat
