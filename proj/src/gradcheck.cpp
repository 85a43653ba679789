#include "hyperlat/gradcheck.hpp"

#include <cmath>

#include "hyperlat/harness.hpp"
#include "hyperlat/pretrain.hpp"
#include "hyperlat/synth.hpp"

namespace hyperlat {

void check_gradients(GradCheckReport& report, const std::string& name,
                     const std::function<Tensor()>& forward, const std::vector<Tensor>& leaves,
                     const std::vector<std::vector<size_t>>& indices, double rtol, double step) {
    for (const auto& leaf : leaves) leaf.zero_grad();
    forward().backward();

    std::vector<std::vector<double>> analytic;
    analytic.reserve(leaves.size());
    for (const auto& leaf : leaves) {
        analytic.emplace_back(leaf.numel(), 0.0);
        for (size_t i = 0; i < leaf.numel(); ++i) analytic.back()[i] = leaf.grad_at(i);
    }

    for (size_t l = 0; l < leaves.size(); ++l) {
        Tensor leaf = leaves[l];
        std::vector<size_t> probe;
        if (l < indices.size() && !indices[l].empty()) probe = indices[l];
        else {
            probe.resize(leaf.numel());
            for (size_t i = 0; i < probe.size(); ++i) probe[i] = i;
        }
        for (size_t i : probe) {
            const double saved = leaf.data()[i];
            leaf.data()[i] = saved + step;
            const double up = forward().scalar();
            leaf.data()[i] = saved - step;
            const double down = forward().scalar();
            leaf.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[l][i];
            const double err = std::abs(a - numeric);
            const double tol = rtol * std::max({1.0, std::abs(a), std::abs(numeric)});
            report.worst_rel_error =
                std::max(report.worst_rel_error, err / std::max({1.0, std::abs(a), std::abs(numeric)}));
            ++report.checks;
            if (err > tol)
                report.failures.push_back(name + " leaf " + std::to_string(l) + " entry " +
                                          std::to_string(i) + ": analytic " + std::to_string(a) +
                                          " vs numeric " + std::to_string(numeric));
        }
    }
}

namespace {

Tensor rand_tensor(std::vector<int64_t> shape, Rng& rng, double away_from_zero = 0.0) {
    Tensor t = normal_init(std::move(shape), rng, 1.0);
    if (away_from_zero > 0.0)
        for (double& x : t.data())
            if (std::abs(x) < away_from_zero) x += (x >= 0.0 ? 1.0 : -1.0) * away_from_zero;
    t.set_requires_grad(true);
    return t;
}

// Wraps an op closure with a fixed random linear readout so every output
// entry contributes to the scalar with a distinct weight. The weights are
// drawn once; the closure must be deterministic for finite differences.
void check_weighted(GradCheckReport& report, const std::string& name, std::function<Tensor()> op,
                    const std::vector<Tensor>& leaves, Rng& rng, double rtol, double step) {
    Tensor w = normal_init(op().shape(), rng, 1.0);
    check_gradients(report, name, [op = std::move(op), w] { return sum(mul(op(), w)); }, leaves,
                    {}, rtol, step);
}

} // namespace

GradCheckReport check_all_ops(size_t seeds, double rtol, double step) {
    GradCheckReport report;
    for (size_t seed = 0; seed < seeds; ++seed) {
        Rng rng(seed * 7919 + 13);
        const int64_t R = 3 + static_cast<int64_t>(rng.below(3));
        const int64_t C = 2 + static_cast<int64_t>(rng.below(3));
        const int64_t K = 2 + static_cast<int64_t>(rng.below(3));

        {
            Tensor a = rand_tensor({R, C}, rng), b = rand_tensor({R, C}, rng);
            check_weighted(report, "add", [=] { return add(a, b); }, {a, b}, rng, rtol, step);
            check_weighted(report, "sub", [=] { return sub(a, b); }, {a, b}, rng, rtol, step);
            check_weighted(report, "mul", [=] { return mul(a, b); }, {a, b}, rng, rtol, step);
        }
        {
            Tensor a = rand_tensor({R, K}, rng), b = rand_tensor({K, C}, rng);
            check_weighted(report, "matmul", [=] { return matmul(a, b); }, {a, b}, rng, rtol,
                           step);
        }
        {
            Tensor x = rand_tensor({R, C}, rng), v = rand_tensor({C}, rng);
            check_weighted(report, "add_rowvec", [=] { return add_rowvec(x, v); }, {x, v}, rng,
                           rtol, step);
        }
        {
            Tensor a = rand_tensor({R, C}, rng);
            check_weighted(report, "transpose", [=] { return transpose(a); }, {a}, rng, rtol,
                           step);
            check_weighted(report, "scale", [=] { return scale(a, 1.7); }, {a}, rng, rtol, step);
            std::vector<double> rs(R);
            for (auto& s : rs) s = rng.normal();
            check_weighted(report, "scale_rows", [=] { return scale_rows(a, rs); }, {a}, rng,
                           rtol, step);
            check_gradients(report, "sum", [=] { return sum(a); }, {a}, {}, rtol, step);
            check_gradients(report, "mean", [=] { return mean(a); }, {a}, {}, rtol, step);
            check_weighted(report, "reshape", [=] { return reshape(a, {C, R}); }, {a}, rng, rtol,
                           step);
        }
        {
            Tensor a = rand_tensor({R}, rng), b = rand_tensor({C}, rng);
            check_weighted(report, "outer", [=] { return outer(a, b); }, {a, b}, rng, rtol, step);
        }
        {
            Tensor a = rand_tensor({R, C}, rng), b = rand_tensor({R, K}, rng);
            check_weighted(report, "concat_cols", [=] { return concat_cols(a, b); }, {a, b}, rng,
                           rtol, step);
            check_weighted(report, "slice_cols", [=] { return slice_cols(a, 1, C); }, {a}, rng,
                           rtol, step);
        }
        {
            Tensor a = rand_tensor({R, C}, rng, 0.05);
            check_weighted(report, "relu", [=] { return relu(a); }, {a}, rng, rtol, step);
            check_weighted(report, "gelu", [=] { return gelu(a); }, {a}, rng, rtol, step);
            check_weighted(report, "tanh", [=] { return tanh_op(a); }, {a}, rng, rtol, step);
            check_weighted(report, "sigmoid", [=] { return sigmoid_op(a); }, {a}, rng, rtol,
                           step);
            check_weighted(report, "softmax_rows", [=] { return softmax_rows(a); }, {a}, rng,
                           rtol, step);
        }
        {
            Tensor a = rand_tensor({R, C}, rng);
            std::vector<char> mask(R * C, 0);
            for (auto& m : mask) m = rng.bernoulli(0.3);
            check_weighted(report, "masked_fill", [=] { return masked_fill(a, mask, -5.0); }, {a},
                           rng, rtol, step);
        }
        {
            Tensor x = rand_tensor({R, C + 1}, rng);
            Tensor g = rand_tensor({C + 1}, rng), b = rand_tensor({C + 1}, rng);
            check_weighted(report, "layer_norm_rows", [=] { return layer_norm_rows(x, g, b); },
                           {x, g, b}, rng, rtol, step);
        }
        {
            Tensor table = rand_tensor({4, C}, rng);
            std::vector<int> idx(5);
            for (auto& i : idx) i = static_cast<int>(rng.below(4));
            check_weighted(report, "embedding_lookup",
                           [=] { return embedding_lookup(table, idx); }, {table}, rng, rtol,
                           step);
        }
        {
            Tensor x = rand_tensor({R, C}, rng);
            Rng drop_rng = rng.derive("dropmask", seed);
            check_weighted(report, "dropout_train",
                           [=] { return dropout(x, 0.4, true, drop_rng); }, {x}, rng, rtol, step);
        }
        {
            Tensor logits = rand_tensor({5}, rng);
            std::vector<double> targets(5);
            for (auto& t : targets) t = rng.bernoulli(0.5) ? 1.0 : 0.0;
            check_gradients(report, "bce_with_logits_mean",
                            [&, targets] { return bce_with_logits_mean(logits, targets); },
                            {logits}, {}, rtol, step);
        }
        {
            Tensor logits = rand_tensor({4, 3}, rng);
            std::vector<int> labels(4);
            for (auto& l : labels) l = static_cast<int>(rng.below(3));
            check_gradients(report, "cross_entropy_mean",
                            [&, labels] { return cross_entropy_mean(logits, labels); }, {logits},
                            {}, rtol, step);
        }
    }
    return report;
}

GradCheckReport check_pretrain_loss(size_t seeds, double rtol, double step) {
    GradCheckReport report;
    for (size_t seed = 0; seed < seeds; ++seed) {
        auto task = synth_planted_partition(2, 10, 10, 0.9, 900 + seed, 5);

        DagConfig dag_cfg;
        dag_cfg.max_order = 3;
        dag_cfg.per_order_budget = 2;
        dag_cfg.neg_quota = 1;
        dag_cfg.num_views = 2;
        dag_cfg.seed = seed;

        EncoderConfig enc_cfg;
        enc_cfg.feature_dim = 5;
        enc_cfg.hidden = 8;
        enc_cfg.layers = 1;
        enc_cfg.heads = 2;
        enc_cfg.dropout = 0.0; // finite differences need a deterministic path
        enc_cfg.ffn_multiplier = 2;
        enc_cfg.max_order = dag_cfg.max_order;
        enc_cfg.num_views = dag_cfg.num_views;

        PretrainModel model = PretrainModel::create(enc_cfg, 40 + seed);
        TokenSequence seq = linearize(build_dag(task.h, 0, dag_cfg), dag_cfg);
        MaskSelection sel = apply_mask(seq, 0.25, Rng(7 + seed));

        auto forward = [&] {
            return pretrain_loss(model, seq, sel, 1.0, /*training=*/false, Rng(0)).total;
        };

        // Probe every student parameter; the position table only at rows the
        // sequence can touch (padding row plus used positions).
        std::vector<Tensor> leaves = model.student_params();
        std::vector<std::vector<size_t>> indices(leaves.size());
        const int64_t d = enc_cfg.hidden;
        for (size_t l = 0; l < leaves.size(); ++l) {
            if (leaves[l].node() == model.encoder.emb_pos.node()) {
                for (int64_t row = 0; row <= static_cast<int64_t>(seq.length); ++row)
                    for (int64_t c = 0; c < d; ++c)
                        indices[l].push_back(static_cast<size_t>(row * d + c));
            }
        }
        check_gradients(report, "pretrain_loss seed " + std::to_string(seed), forward, leaves,
                        indices, rtol, step);
    }
    return report;
}

} // namespace hyperlat
