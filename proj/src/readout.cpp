#include "hyperlat/readout.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlat/metrics.hpp"

namespace hyperlat {

const std::vector<std::string>& TransferManifest::transfer_prefixes() {
    static const std::vector<std::string> prefixes = {
        "feature_projection.", "embed.", "bias.", "block", "final_norm."};
    return prefixes;
}

const std::vector<std::string>& TransferManifest::reinit_prefixes() {
    static const std::vector<std::string> prefixes = {"pretrain.", "teacher.", "readout."};
    return prefixes;
}

namespace {
bool has_prefix(const std::string& name, const std::vector<std::string>& prefixes) {
    for (const auto& p : prefixes)
        if (name.rfind(p, 0) == 0) return true;
    return false;
}
} // namespace

bool TransferManifest::is_transferable(const std::string& name) {
    return has_prefix(name, transfer_prefixes());
}

bool TransferManifest::is_reinit(const std::string& name) {
    return has_prefix(name, reinit_prefixes());
}

TransferReport transfer(const CheckpointData& checkpoint, const ParamStore& store) {
    TransferReport report;
    for (const auto& name : store.names()) {
        if (!TransferManifest::is_transferable(name)) {
            if (!TransferManifest::is_reinit(name))
                throw InputError("transfer: parameter " + name +
                                 " is covered by neither the transfer nor the reinit list");
            report.reinitialized.push_back(name);
            continue;
        }
        auto it = checkpoint.find(name);
        if (it == checkpoint.end()) {
            report.missing.push_back(name);
            continue;
        }
        Tensor t = store.get(name);
        if (t.shape() != it->second.shape)
            throw InputError("transfer: shape mismatch for parameter " + name);
        t.data() = it->second.values;
        report.loaded.push_back(name);
    }
    return report;
}

NodeReadout NodeReadout::create(ParamStore& store, const EncoderConfig& cfg, int num_classes,
                                Rng rng) {
    const int64_t d = cfg.hidden;
    Rng r = rng.derive("node_readout");
    NodeReadout ro;
    ro.pool_w = store.add("readout.node.pool_w", normal_init({d}, r, 0.02));
    ro.pool_W = store.add("readout.node.pool_W", xavier_uniform({d, d}, r));
    ro.cls_w1 = store.add("readout.node.cls.w1", xavier_uniform({2 * d, d}, r));
    ro.cls_b1 = store.add("readout.node.cls.b1", Tensor::zeros({d}));
    ro.cls_w2 = store.add("readout.node.cls.w2", xavier_uniform({d, num_classes}, r));
    ro.cls_b2 = store.add("readout.node.cls.b2", Tensor::zeros({num_classes}));
    return ro;
}

NodeModel NodeModel::create(const EncoderConfig& cfg, int num_classes, uint64_t seed) {
    NodeModel m;
    m.cfg = cfg;
    m.num_classes = num_classes;
    Rng rng(seed);
    m.encoder = EncoderParams::create(m.store, cfg, rng);
    m.readout = NodeReadout::create(m.store, cfg, num_classes, rng);
    return m;
}

namespace {

// α over tokens: softmax of wᵀ tanh(W h_S) with padding keys excluded.
Tensor pool_alpha(const NodeReadout& ro, const Tensor& states, const TokenSequence& seq) {
    const int64_t d = states.dim(1);
    Tensor scores = matmul(tanh_op(matmul(states, ro.pool_W)), reshape(ro.pool_w, {d, 1}));
    Tensor row = reshape(scores, {1, static_cast<int64_t>(seq.length)});
    std::vector<char> pad(seq.length);
    for (size_t i = 0; i < seq.length; ++i) pad[i] = seq.is_pad[i];
    return softmax_rows(masked_fill(row, pad, -1e30)); // [1, T]
}

// Mean of the per-view center states, [1, d].
Tensor center_state(const Tensor& states, const TokenSequence& seq) {
    std::vector<int> rows(seq.center_positions.begin(), seq.center_positions.end());
    Tensor centers = gather_rows(states, rows);
    Tensor w = Tensor::constant({1, static_cast<int64_t>(rows.size())},
                                1.0 / static_cast<double>(rows.size()));
    return matmul(w, centers);
}

} // namespace

Tensor node_logits(const NodeModel& model, const TokenSequence& seq, bool training, Rng rng) {
    Tensor states = encode(seq, model.encoder, training, rng.derive("enc"));
    Tensor alpha = pool_alpha(model.readout, states, seq);
    Tensor pooled = matmul(alpha, states);            // [1, d]
    Tensor rep = concat_cols(center_state(states, seq), pooled); // [1, 2d]
    Tensor mid = gelu(add_rowvec(matmul(rep, model.readout.cls_w1), model.readout.cls_b1));
    mid = dropout(mid, model.cfg.dropout, training, rng.derive("drop.cls"));
    return add_rowvec(matmul(mid, model.readout.cls_w2), model.readout.cls_b2);
}

std::vector<double> node_pool_weights(const NodeModel& model, const TokenSequence& seq) {
    Tensor states = encode(seq, model.encoder, /*training=*/false, Rng(0));
    Tensor alpha = pool_alpha(model.readout, states, seq);
    return alpha.data();
}

ComboReadout ComboReadout::create(ParamStore& store, const EncoderConfig& cfg, int num_effects,
                                  Rng rng) {
    const int64_t d = cfg.hidden;
    Rng r = rng.derive("combo_readout");
    ComboReadout ro;
    ro.effect_table = store.add("readout.combo.effect_table",
                                normal_init({std::max(num_effects, 1), d}, r, 0.02));
    ro.mlp_w1 = store.add("readout.combo.mlp.w1", xavier_uniform({2 * d, d}, r));
    ro.mlp_b1 = store.add("readout.combo.mlp.b1", Tensor::zeros({d}));
    ro.mlp_w2 = store.add("readout.combo.mlp.w2", xavier_uniform({d, 1}, r));
    ro.mlp_b2 = store.add("readout.combo.mlp.b2", Tensor::zeros({1}));
    return ro;
}

ComboModel ComboModel::create(const EncoderConfig& cfg, int num_effects, uint64_t seed) {
    ComboModel m;
    m.cfg = cfg;
    m.num_effects = num_effects;
    Rng rng(seed);
    m.encoder = EncoderParams::create(m.store, cfg, rng);
    m.readout = ComboReadout::create(m.store, cfg, num_effects, rng);
    return m;
}

Tensor combo_logit(const ComboModel& model, const Hypergraph& h, const DagConfig& dag_cfg,
                   const VertexSubset& drugs, std::optional<int> side_effect, bool training,
                   Rng rng) {
    if (drugs.size() < 2) throw InputError("combo_logit: combination needs at least 2 members");
    if (side_effect && (*side_effect < 0 || *side_effect >= model.num_effects))
        throw InputError("combo_logit: unknown side-effect id " + std::to_string(*side_effect));

    Tensor sum; // Σ center states over member drugs
    for (VertexId drug : drugs.members()) {
        TokenSequence seq = linearize(build_dag(h, drug, dag_cfg), dag_cfg);
        Tensor states = encode(seq, model.encoder, training, rng.derive("enc", drug));
        Tensor c = center_state(states, seq);
        sum = sum.defined() ? add(sum, c) : c;
    }
    Tensor h_g = scale(sum, 1.0 / static_cast<double>(drugs.size()));
    Tensor e_s = side_effect ? gather_rows(model.readout.effect_table, {*side_effect})
                             : Tensor::zeros({1, model.cfg.hidden});
    Tensor rep = concat_cols(h_g, e_s);
    Tensor mid = gelu(add_rowvec(matmul(rep, model.readout.mlp_w1), model.readout.mlp_b1));
    mid = dropout(mid, model.cfg.dropout, training, rng.derive("drop.combo"));
    return add_rowvec(matmul(mid, model.readout.mlp_w2), model.readout.mlp_b2);
}

double combo_score(const ComboModel& model, const Hypergraph& h, const DagConfig& dag_cfg,
                   const VertexSubset& drugs, std::optional<int> side_effect) {
    const double z = combo_logit(model, h, dag_cfg, drugs, side_effect, /*training=*/false,
                                 Rng(0)).scalar();
    return 1.0 / (1.0 + std::exp(-z));
}

FitResult train_node_readout(NodeModel& model, const std::vector<TokenSequence>& seqs,
                             const std::vector<int>& labels, const std::vector<size_t>& train_idx,
                             const std::vector<size_t>& val_idx, const TrainOptions& opt) {
    if (seqs.size() != labels.size()) throw InputError("train_node_readout: label count mismatch");
    Rng rng(opt.seed);
    AdamW optim(model.store.all(), opt.learning_rate, opt.weight_decay);

    FitResult result;
    CheckpointData best = snapshot(model.store);
    double best_val = -1.0;
    size_t since_best = 0;

    for (size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        std::vector<size_t> order = train_idx;
        rng.derive("shuffle", epoch).shuffle(order);
        for (size_t start = 0; start < order.size(); start += opt.batch_size) {
            const size_t end = std::min(order.size(), start + opt.batch_size);
            Tensor batch_loss;
            for (size_t k = start; k < end; ++k) {
                Tensor logits = node_logits(model, seqs[order[k]], /*training=*/true,
                                            rng.derive("fwd", epoch, order[k]));
                Tensor loss = cross_entropy_mean(logits, {labels[order[k]]});
                batch_loss = batch_loss.defined() ? add(batch_loss, loss) : loss;
            }
            batch_loss = scale(batch_loss, 1.0 / static_cast<double>(end - start));
            optim.zero_grad();
            batch_loss.backward();
            clip_global_norm(model.store.all(), opt.clip_norm);
            optim.step();
        }

        auto preds = predict_node(model, seqs, val_idx);
        std::vector<int> truth;
        for (size_t k : val_idx) truth.push_back(labels[k]);
        const double val_acc = accuracy(preds, truth);
        result.epochs_run = epoch + 1;
        if (val_acc > best_val) {
            best_val = val_acc;
            result.best_epoch = epoch;
            since_best = 0;
            best = snapshot(model.store);
        } else if (++since_best >= opt.patience) {
            break;
        }
    }

    for (const auto& name : model.store.names()) {
        Tensor t = model.store.get(name);
        t.data() = best.at(name).values;
    }
    result.best_val_metric = best_val;
    return result;
}

std::vector<int> predict_node(const NodeModel& model, const std::vector<TokenSequence>& seqs,
                              const std::vector<size_t>& idx) {
    std::vector<int> preds;
    preds.reserve(idx.size());
    for (size_t k : idx) {
        Tensor logits = node_logits(model, seqs[k], /*training=*/false, Rng(0));
        const auto& row = logits.data();
        preds.push_back(static_cast<int>(
            std::max_element(row.begin(), row.end()) - row.begin()));
    }
    return preds;
}

FitResult train_combo_readout(ComboModel& model, const Hypergraph& h, const DagConfig& dag_cfg,
                              const std::vector<ComboSample>& samples,
                              const std::vector<size_t>& train_idx,
                              const std::vector<size_t>& val_idx, const TrainOptions& opt) {
    Rng rng(opt.seed);
    AdamW optim(model.store.all(), opt.learning_rate, opt.weight_decay);

    FitResult result;
    CheckpointData best = snapshot(model.store);
    double best_val = -1.0;
    size_t since_best = 0;

    for (size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        std::vector<size_t> order = train_idx;
        rng.derive("shuffle", epoch).shuffle(order);
        for (size_t start = 0; start < order.size(); start += opt.batch_size) {
            const size_t end = std::min(order.size(), start + opt.batch_size);
            Tensor batch_loss;
            for (size_t k = start; k < end; ++k) {
                const ComboSample& s = samples[order[k]];
                Tensor logit = combo_logit(model, h, dag_cfg, s.drugs, s.side_effect,
                                           /*training=*/true, rng.derive("fwd", epoch, order[k]));
                Tensor loss = bce_with_logits_mean(reshape(logit, {1}), {s.label});
                batch_loss = batch_loss.defined() ? add(batch_loss, loss) : loss;
            }
            batch_loss = scale(batch_loss, 1.0 / static_cast<double>(end - start));
            optim.zero_grad();
            batch_loss.backward();
            clip_global_norm(model.store.all(), opt.clip_norm);
            optim.step();
        }

        auto scores = score_combos_leakage_safe(model, h, dag_cfg, samples, val_idx);
        std::vector<double> truth;
        for (size_t k : val_idx) truth.push_back(samples[k].label);
        const double val_auroc = auroc(scores, truth);
        result.epochs_run = epoch + 1;
        if (val_auroc > best_val) {
            best_val = val_auroc;
            result.best_epoch = epoch;
            since_best = 0;
            best = snapshot(model.store);
        } else if (++since_best >= opt.patience) {
            break;
        }
    }

    for (const auto& name : model.store.names()) {
        Tensor t = model.store.get(name);
        t.data() = best.at(name).values;
    }
    result.best_val_metric = best_val;
    return result;
}

std::vector<double> score_combos_leakage_safe(const ComboModel& model, const Hypergraph& h,
                                              const DagConfig& dag_cfg,
                                              const std::vector<ComboSample>& samples,
                                              const std::vector<size_t>& idx) {
    std::vector<double> scores;
    scores.reserve(idx.size());
    for (size_t k : idx) {
        const ComboSample& s = samples[k];
        if (h.has_edge(s.drugs)) {
            Hypergraph masked = h.without_edge(s.drugs);
            scores.push_back(combo_score(model, masked, dag_cfg, s.drugs, s.side_effect));
        } else {
            scores.push_back(combo_score(model, h, dag_cfg, s.drugs, s.side_effect));
        }
    }
    return scores;
}

} // namespace hyperlat
