#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hyperlat/tensor.hpp"

namespace hyperlat {

// Central finite-difference verification of reverse-mode gradients.
// For each leaf entry: |analytic − (f(x+h) − f(x−h)) / 2h| must stay within
// rtol · max(1, |analytic|, |numeric|).
struct GradCheckReport {
    size_t checks = 0;
    double worst_rel_error = 0.0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

// Checks one scalar-valued forward closure against finite differences on
// the given leaves. `indices` optionally restricts which entries of each
// leaf are probed (empty = all).
void check_gradients(GradCheckReport& report, const std::string& name,
                     const std::function<Tensor()>& forward, const std::vector<Tensor>& leaves,
                     const std::vector<std::vector<size_t>>& indices = {}, double rtol = 1e-5,
                     double step = 1e-6);

// Randomized per-op suite over `seeds` draws.
GradCheckReport check_all_ops(size_t seeds, double rtol = 1e-5, double step = 1e-6);

// Full masked-reconstruction objective on a small synthetic instance,
// checked against finite differences for every student parameter.
GradCheckReport check_pretrain_loss(size_t seeds, double rtol = 1e-5, double step = 1e-6);

} // namespace hyperlat
