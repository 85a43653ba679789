#include "hyperlat/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hyperlat/metrics.hpp"

namespace hyperlat {

void PretrainConfig::validate() const {
    if (mask_ratio <= 0.0 || mask_ratio >= 1.0)
        throw InputError("PretrainConfig: mask_ratio must be in (0,1)");
    if (epochs < 1 || batch_size < 1) throw InputError("PretrainConfig: bad loop sizes");
    if (ema_decay < 0.0 || ema_decay > 1.0) throw InputError("PretrainConfig: bad ema_decay");
}

PretrainHeads PretrainHeads::create(ParamStore& store, const EncoderConfig& cfg, Rng rng,
                                    const EncoderParams& encoder) {
    const int64_t d = cfg.hidden, din = cfg.feature_dim;
    const int64_t bottleneck = std::max<int64_t>(d / 2, 1);
    Rng r = rng.derive("heads");
    PretrainHeads h;
    h.mask_token = store.add("pretrain.mask_token", normal_init({d}, r, 0.02));
    h.attr_mask = store.add("pretrain.attr_mask", normal_init({d}, r, 0.02));
    h.sem_w1 = store.add("pretrain.sem.w1", xavier_uniform({d, d}, r));
    h.sem_b1 = store.add("pretrain.sem.b1", Tensor::zeros({d}));
    h.sem_w2 = store.add("pretrain.sem.w2", xavier_uniform({d, d}, r));
    h.sem_b2 = store.add("pretrain.sem.b2", Tensor::zeros({d}));
    h.ex_w1 = store.add("pretrain.exist.w1", xavier_uniform({d, bottleneck}, r));
    h.ex_b1 = store.add("pretrain.exist.b1", Tensor::zeros({bottleneck}));
    h.ex_w2 = store.add("pretrain.exist.w2", xavier_uniform({bottleneck, 1}, r));
    h.ex_b2 = store.add("pretrain.exist.b2", Tensor::zeros({1}));
    // The teacher starts as a copy of the feature projector and then trails
    // it by EMA; it is never part of the gradient tape.
    h.teacher_w1 = store.add("teacher.w1", Tensor::from({din, d}, encoder.feat_w1.data()));
    h.teacher_b1 = store.add("teacher.b1", Tensor::from({d}, encoder.feat_b1.data()));
    h.teacher_w2 = store.add("teacher.w2", Tensor::from({d, d}, encoder.feat_w2.data()));
    h.teacher_b2 = store.add("teacher.b2", Tensor::from({d}, encoder.feat_b2.data()));
    for (Tensor t : {h.teacher_w1, h.teacher_b1, h.teacher_w2, h.teacher_b2})
        t.set_requires_grad(false);
    return h;
}

PretrainModel PretrainModel::create(const EncoderConfig& cfg, uint64_t seed) {
    PretrainModel m;
    m.cfg = cfg;
    Rng rng(seed);
    m.encoder = EncoderParams::create(m.store, cfg, rng);
    m.heads = PretrainHeads::create(m.store, cfg, rng, m.encoder);
    return m;
}

std::vector<Tensor> PretrainModel::student_params() const {
    std::vector<Tensor> out;
    for (const auto& name : store.names()) {
        Tensor t = store.get(name);
        if (t.requires_grad()) out.push_back(t);
    }
    return out;
}

std::vector<Tensor> PretrainModel::teacher_params() const {
    return {heads.teacher_w1, heads.teacher_b1, heads.teacher_w2, heads.teacher_b2};
}

std::vector<Tensor> PretrainModel::projector_params() const {
    return {encoder.feat_w1, encoder.feat_b1, encoder.feat_w2, encoder.feat_b2};
}

MaskSelection apply_mask(const TokenSequence& seq, double mask_ratio, Rng rng) {
    const auto candidates = seq.maskable_positions();
    if (candidates.empty())
        throw InputError("apply_mask: sequence has no non-center tokens to mask");
    size_t m = static_cast<size_t>(
        std::llround(mask_ratio * static_cast<double>(candidates.size())));
    m = std::clamp<size_t>(m, 1, candidates.size());

    // Reservoir over the candidate list.
    std::vector<size_t> picked(candidates.begin(), candidates.begin() + m);
    for (size_t i = m; i < candidates.size(); ++i) {
        const size_t j = rng.below(i + 1);
        if (j < m) picked[j] = candidates[i];
    }
    std::sort(picked.begin(), picked.end());

    MaskSelection sel;
    sel.flags.assign(seq.length, 0);
    for (size_t pos : picked) sel.flags[pos] = 1;
    sel.positions = std::move(picked);
    return sel;
}

Tensor teacher_targets(const PretrainModel& model, const TokenSequence& seq,
                       const std::vector<size_t>& positions) {
    std::vector<double> flat;
    flat.reserve(positions.size() * seq.feature_dim);
    for (size_t pos : positions)
        flat.insert(flat.end(), seq.features[pos].begin(), seq.features[pos].end());
    Tensor x = Tensor::from({static_cast<int64_t>(positions.size()), model.cfg.feature_dim},
                            std::move(flat));
    Tensor t = gelu(add_rowvec(matmul(x, model.heads.teacher_w1), model.heads.teacher_b1));
    return add_rowvec(matmul(t, model.heads.teacher_w2), model.heads.teacher_b2);
}

PretrainLoss pretrain_loss(const PretrainModel& model, const TokenSequence& seq,
                           const MaskSelection& mask, double lambda_exist, bool training,
                           Rng rng) {
    if (mask.positions.empty()) throw InputError("pretrain_loss: empty mask set");

    MaskInputs mi{mask.flags, model.heads.mask_token, model.heads.attr_mask};
    Tensor states = encode(seq, model.encoder, training, rng.derive("enc"), &mi);

    std::vector<int> mask_rows(mask.positions.begin(), mask.positions.end());
    Tensor masked_states = gather_rows(states, mask_rows);
    Tensor mid = gelu(add_rowvec(matmul(masked_states, model.heads.sem_w1), model.heads.sem_b1));
    mid = dropout(mid, model.cfg.dropout, training, rng.derive("drop.sem"));
    Tensor z_hat = add_rowvec(matmul(mid, model.heads.sem_w2), model.heads.sem_b2);
    Tensor z = teacher_targets(model, seq, mask.positions);
    Tensor dz = sub(z_hat, z);
    Tensor sem = scale(sum(mul(dz, dz)), 1.0 / static_cast<double>(mask.positions.size()));

    const auto non_pad = seq.non_pad_positions();
    std::vector<int> rows(non_pad.begin(), non_pad.end());
    Tensor ex_mid = gelu(add_rowvec(matmul(gather_rows(states, rows), model.heads.ex_w1),
                                    model.heads.ex_b1));
    ex_mid = dropout(ex_mid, model.cfg.dropout, training, rng.derive("drop.ex"));
    Tensor logits = reshape(add_rowvec(matmul(ex_mid, model.heads.ex_w2), model.heads.ex_b2),
                            {static_cast<int64_t>(non_pad.size())});
    std::vector<double> labels;
    labels.reserve(non_pad.size());
    for (size_t pos : non_pad) labels.push_back(seq.exists_index[pos] == 2 ? 1.0 : 0.0);
    Tensor exist = bce_with_logits_mean(logits, labels);

    PretrainLoss out;
    out.semantic = sem.scalar();
    out.existence = exist.scalar();
    out.total = lambda_exist == 0.0 ? sem : add(sem, scale(exist, lambda_exist));
    out.exist_logits = logits;
    out.exist_labels = std::move(labels);
    return out;
}

PretrainResult pretrain_loop(PretrainModel& model, const std::vector<TokenSequence>& corpus,
                             const PretrainConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);

    // Center-only sequences (isolated targets) offer nothing to mask and are
    // excluded from the objective.
    std::vector<size_t> usable;
    for (size_t i = 0; i < corpus.size(); ++i)
        if (!corpus[i].maskable_positions().empty()) usable.push_back(i);
    if (usable.empty()) throw InputError("pretrain_loop: no maskable sequences in the corpus");

    // Held-out split, disjoint by center vertex.
    std::set<VertexId> center_set;
    for (size_t i : usable) center_set.insert(corpus[i].center);
    std::vector<VertexId> centers(center_set.begin(), center_set.end());
    Rng split_rng = rng.derive("valsplit");
    split_rng.shuffle(centers);
    const size_t n_val = std::clamp<size_t>(
        static_cast<size_t>(std::llround(0.1 * static_cast<double>(centers.size()))), 1,
        centers.size() - 1);
    std::set<VertexId> val_centers(centers.begin(), centers.begin() + n_val);
    PretrainResult result;
    result.val_centers.assign(val_centers.begin(), val_centers.end());

    std::vector<size_t> train_idx, val_idx;
    for (size_t i : usable)
        (val_centers.count(corpus[i].center) ? val_idx : train_idx).push_back(i);
    if (train_idx.empty() || val_idx.empty())
        throw InputError("pretrain_loop: split produced an empty train or validation set");

    AdamW opt(model.student_params(), cfg.learning_rate, cfg.weight_decay);
    const auto student = model.student_params();
    const auto teacher = model.teacher_params();
    const auto projector = model.projector_params();

    double best_val = 1e308;
    size_t best_epoch = 0;
    size_t since_best = 0;
    CheckpointData best_snapshot = snapshot(model.store);

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<size_t> order = train_idx;
        rng.derive("shuffle", epoch).shuffle(order);

        double train_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            Tensor batch_loss;
            for (size_t k = start; k < end; ++k) {
                const TokenSequence& seq = corpus[order[k]];
                auto sel = apply_mask(seq, cfg.mask_ratio, rng.derive("mask", epoch, order[k]));
                auto loss = pretrain_loss(model, seq, sel, cfg.lambda_exist, /*training=*/true,
                                          rng.derive("fwd", epoch, order[k]));
                batch_loss = batch_loss.defined() ? add(batch_loss, loss.total) : loss.total;
            }
            batch_loss = scale(batch_loss, 1.0 / static_cast<double>(end - start));
            opt.zero_grad();
            batch_loss.backward();
            clip_global_norm(student, cfg.clip_norm);
            opt.step();
            ema_update(teacher, projector, cfg.ema_decay);
            train_loss += batch_loss.scalar();
            ++batches;
        }
        train_loss /= static_cast<double>(batches);

        double val_loss = 0.0;
        std::vector<double> scores, labels;
        for (size_t k : val_idx) {
            const TokenSequence& seq = corpus[k];
            auto sel = apply_mask(seq, cfg.mask_ratio, rng.derive("valmask", k));
            auto loss = pretrain_loss(model, seq, sel, cfg.lambda_exist, /*training=*/false,
                                      rng.derive("val", k));
            val_loss += loss.total.scalar();
            for (size_t i = 0; i < loss.exist_labels.size(); ++i) {
                scores.push_back(loss.exist_logits.data()[i]);
                labels.push_back(loss.exist_labels[i]);
            }
        }
        val_loss /= static_cast<double>(val_idx.size());

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_loss;
        rec.val_loss = val_loss;
        rec.val_exist_auroc = auroc(scores, labels);
        result.curve.push_back(rec);

        if (val_loss < best_val) {
            best_val = val_loss;
            best_epoch = epoch;
            since_best = 0;
            best_snapshot = snapshot(model.store);
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    result.checkpoint = std::move(best_snapshot);
    result.stopped_epoch = best_epoch;
    result.best_val_loss = best_val;
    return result;
}

} // namespace hyperlat
