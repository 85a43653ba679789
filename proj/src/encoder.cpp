#include "hyperlat/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlat/wl.hpp"

namespace hyperlat {

void EncoderConfig::validate() const {
    if (hidden < 1 || layers < 1 || heads < 1) throw InputError("EncoderConfig: bad dimensions");
    if (hidden % heads != 0) throw InputError("EncoderConfig: heads must divide hidden");
    if (feature_dim < 1) throw InputError("EncoderConfig: feature_dim must be set");
    if (dropout < 0.0 || dropout >= 1.0) throw InputError("EncoderConfig: dropout out of range");
}

EncoderParams EncoderParams::create(ParamStore& store, const EncoderConfig& cfg, Rng rng) {
    cfg.validate();
    EncoderParams p;
    p.cfg = cfg;
    const int64_t d = cfg.hidden, din = cfg.feature_dim, H = cfg.heads;
    const int64_t f = cfg.ffn_multiplier * d;

    Rng r = rng.derive("encoder");
    p.feat_w1 = store.add("feature_projection.w1", xavier_uniform({din, d}, r));
    p.feat_b1 = store.add("feature_projection.b1", Tensor::zeros({d}));
    p.feat_w2 = store.add("feature_projection.w2", xavier_uniform({d, d}, r));
    p.feat_b2 = store.add("feature_projection.b2", Tensor::zeros({d}));

    const int64_t order_rows = static_cast<int64_t>(cfg.max_order) + 1;
    const int64_t view_rows = static_cast<int64_t>(cfg.num_views) + 1;
    p.emb_order = store.add("embed.order", normal_init({order_rows, d}, r, 0.02));
    p.emb_exist = store.add("embed.exist", normal_init({3, d}, r, 0.02));
    p.emb_source = store.add("embed.exist_source", normal_init({4, d}, r, 0.02));
    p.emb_view = store.add("embed.view", normal_init({view_rows, d}, r, 0.02));
    p.emb_pos = store.add("embed.position", normal_init({cfg.position_capacity, d}, r, 0.02));

    p.bias_dir = store.add("bias.edge_direction", Tensor::zeros({3, H}));
    p.bias_comp = store.add("bias.exist_transition", Tensor::zeros({7, H}));
    p.bias_gap = store.add("bias.order_distance", Tensor::zeros({7, H}));
    p.bias_ovlp = store.add("bias.overlap_bucket", Tensor::zeros({5, H}));
    p.bias_sib = store.add("bias.sibling", Tensor::zeros({H}));

    for (int64_t l = 0; l < cfg.layers; ++l) {
        const std::string pre = "block" + std::to_string(l) + ".";
        Block b;
        b.wq = store.add(pre + "attn.wq", xavier_uniform({d, d}, r));
        b.bq = store.add(pre + "attn.bq", Tensor::zeros({d}));
        b.wk = store.add(pre + "attn.wk", xavier_uniform({d, d}, r));
        b.bk = store.add(pre + "attn.bk", Tensor::zeros({d}));
        b.wv = store.add(pre + "attn.wv", xavier_uniform({d, d}, r));
        b.bv = store.add(pre + "attn.bv", Tensor::zeros({d}));
        b.wo = store.add(pre + "attn.wo", xavier_uniform({d, d}, r));
        b.bo = store.add(pre + "attn.bo", Tensor::zeros({d}));
        b.norm1_g = store.add(pre + "norm1.gamma", Tensor::constant({d}, 1.0));
        b.norm1_b = store.add(pre + "norm1.beta", Tensor::zeros({d}));
        b.norm2_g = store.add(pre + "norm2.gamma", Tensor::constant({d}, 1.0));
        b.norm2_b = store.add(pre + "norm2.beta", Tensor::zeros({d}));
        b.ffn_w1 = store.add(pre + "ffn.w1", xavier_uniform({d, f}, r));
        b.ffn_b1 = store.add(pre + "ffn.b1", Tensor::zeros({f}));
        b.ffn_w2 = store.add(pre + "ffn.w2", xavier_uniform({f, d}, r));
        b.ffn_b2 = store.add(pre + "ffn.b2", Tensor::zeros({d}));
        p.blocks.push_back(std::move(b));
    }
    p.final_g = store.add("final_norm.gamma", Tensor::constant({d}, 1.0));
    p.final_b = store.add("final_norm.beta", Tensor::zeros({d}));
    return p;
}

EncoderParams EncoderParams::create_witness(ParamStore& store, const EncoderConfig& cfg) {
    if (cfg.hidden < 4)
        throw InputError("create_witness: hidden dimension must be >= 4");
    Rng dummy(0);
    EncoderParams p = create(store, cfg, dummy);
    // Zero everything, then re-establish layer-norm scales and the
    // orthonormal source rows (pad 0, center e0, obs e1, neg e2).
    for (const auto& name : store.names()) {
        Tensor t = store.get(name);
        std::fill(t.data().begin(), t.data().end(), 0.0);
    }
    for (auto& b : p.blocks) {
        std::fill(b.norm1_g.data().begin(), b.norm1_g.data().end(), 1.0);
        std::fill(b.norm2_g.data().begin(), b.norm2_g.data().end(), 1.0);
    }
    std::fill(p.final_g.data().begin(), p.final_g.data().end(), 1.0);
    const int64_t d = cfg.hidden;
    p.emb_source.data()[1 * d + 0] = 1.0; // center
    p.emb_source.data()[2 * d + 1] = 1.0; // obs
    p.emb_source.data()[3 * d + 2] = 1.0; // neg
    return p;
}

namespace {

// 0/1 column selecting a set of rows, as a constant (no-grad) tensor.
Tensor row_selector(const std::vector<char>& rows) {
    std::vector<double> col(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) col[i] = rows[i] ? 1.0 : 0.0;
    return Tensor::from({static_cast<int64_t>(rows.size()), 1}, std::move(col));
}

std::vector<double> keep_scales(const std::vector<char>& drop) {
    std::vector<double> s(drop.size());
    for (size_t i = 0; i < drop.size(); ++i) s[i] = drop[i] ? 0.0 : 1.0;
    return s;
}

// Per-head additive logit matrices assembled from the relation buckets.
std::vector<Tensor> assemble_bias(const TokenSequence& seq, const EncoderParams& p,
                                  const MaskInputs* mask) {
    const EncoderConfig& cfg = p.cfg;
    if (!cfg.use_direction_bias && !cfg.use_composition_bias && !cfg.use_aux_bias) return {};
    const size_t T = seq.length;
    const int64_t H = cfg.heads;

    std::vector<int> role = seq.role_pair;
    if (mask) {
        // A masked token's source must stay hidden from attention.
        for (size_t i = 0; i < T; ++i)
            for (size_t j = 0; j < T; ++j)
                if (mask->masked[i] || mask->masked[j]) role[seq.at(i, j)] = 0;
    }

    Tensor total; // [T*T, H]
    auto accumulate = [&](Tensor part) { total = total.defined() ? add(total, part) : part; };
    if (cfg.use_direction_bias) accumulate(embedding_lookup(p.bias_dir, seq.direction));
    if (cfg.use_composition_bias) accumulate(embedding_lookup(p.bias_comp, role));
    if (cfg.use_aux_bias) {
        accumulate(embedding_lookup(p.bias_gap, seq.order_gap));
        accumulate(embedding_lookup(p.bias_ovlp, seq.overlap));
        std::vector<double> sib(T * T);
        for (size_t i = 0; i < T * T; ++i) sib[i] = seq.sibling[i] ? 1.0 : 0.0;
        accumulate(outer(Tensor::from({static_cast<int64_t>(T * T)}, std::move(sib)), p.bias_sib));
    }

    std::vector<Tensor> per_head;
    per_head.reserve(H);
    for (int64_t h = 0; h < H; ++h)
        per_head.push_back(reshape(slice_cols(total, h, h + 1),
                                   {static_cast<int64_t>(T), static_cast<int64_t>(T)}));
    return per_head;
}

} // namespace

Tensor embed(const TokenSequence& seq, const EncoderParams& p, bool training, Rng rng,
             const MaskInputs* mask) {
    const EncoderConfig& cfg = p.cfg;
    const size_t T = seq.length;
    if (static_cast<int64_t>(T) + 1 > cfg.position_capacity)
        throw ResourceError("embed: sequence exceeds position capacity");
    if (seq.feature_dim != static_cast<size_t>(cfg.feature_dim))
        throw InputError("embed: sequence feature width " + std::to_string(seq.feature_dim) +
                         " does not match encoder feature_dim " + std::to_string(cfg.feature_dim));

    std::vector<double> flat;
    flat.reserve(T * seq.feature_dim);
    for (const auto& row : seq.features) flat.insert(flat.end(), row.begin(), row.end());
    Tensor x = Tensor::from({static_cast<int64_t>(T), cfg.feature_dim}, std::move(flat));

    Tensor hidden1 = relu(add_rowvec(matmul(x, p.feat_w1), p.feat_b1));
    hidden1 = dropout(hidden1, cfg.dropout, training, rng.derive("drop.feat"));
    Tensor proj = add_rowvec(matmul(hidden1, p.feat_w2), p.feat_b2);

    Tensor attrs = add(embedding_lookup(p.emb_exist, seq.exists_index),
                       embedding_lookup(p.emb_source, seq.source_index));
    if (mask) {
        if (mask->masked.size() != T) throw InputError("embed: mask length mismatch");
        proj = scale_rows(proj, keep_scales(mask->masked));
        attrs = scale_rows(attrs, keep_scales(mask->masked));
        Tensor sel = row_selector(mask->masked);
        proj = add(proj, matmul(sel, reshape(mask->mask_token, {1, cfg.hidden})));
        attrs = add(attrs, matmul(sel, reshape(mask->attr_mask, {1, cfg.hidden})));
    }

    Tensor h = add(proj, attrs);
    h = add(h, embedding_lookup(p.emb_order, seq.order_index));
    h = add(h, embedding_lookup(p.emb_view, seq.view_index));
    h = add(h, embedding_lookup(p.emb_pos, seq.position_index));

    std::vector<double> keep(T);
    for (size_t i = 0; i < T; ++i) keep[i] = seq.is_pad[i] ? 0.0 : 1.0;
    return scale_rows(h, std::move(keep));
}

Tensor encode(const TokenSequence& seq, const EncoderParams& p, bool training, Rng rng,
              const MaskInputs* mask, EncodeTrace* trace) {
    const EncoderConfig& cfg = p.cfg;
    const size_t T = seq.length;
    const int64_t H = cfg.heads, dh = cfg.head_dim();
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

    Tensor h = embed(seq, p, training, rng, mask);
    std::vector<Tensor> head_bias = assemble_bias(seq, p, mask);

    // Key-side padding mask, shared by every layer and head.
    std::vector<char> pad_keys(T * T, 0);
    for (size_t i = 0; i < T; ++i)
        for (size_t j = 0; j < T; ++j)
            if (seq.is_pad[j]) pad_keys[i * T + j] = 1;

    std::vector<double> keep(T);
    for (size_t i = 0; i < T; ++i) keep[i] = seq.is_pad[i] ? 0.0 : 1.0;

    for (size_t l = 0; l < p.blocks.size(); ++l) {
        const auto& blk = p.blocks[l];
        Tensor y = layer_norm_rows(h, blk.norm1_g, blk.norm1_b);
        Tensor q = add_rowvec(matmul(y, blk.wq), blk.bq);
        Tensor k = add_rowvec(matmul(y, blk.wk), blk.bk);
        Tensor v = add_rowvec(matmul(y, blk.wv), blk.bv);

        Tensor heads_out;
        for (int64_t head = 0; head < H; ++head) {
            Tensor qh = slice_cols(q, head * dh, (head + 1) * dh);
            Tensor kh = slice_cols(k, head * dh, (head + 1) * dh);
            Tensor vh = slice_cols(v, head * dh, (head + 1) * dh);
            Tensor logits = scale(matmul(qh, transpose(kh)), inv_sqrt_dh);
            if (!head_bias.empty()) logits = add(logits, head_bias[head]);
            logits = masked_fill(logits, pad_keys, -1e30);
            Tensor attn = softmax_rows(logits);
            if (trace) trace->attention.push_back(attn);
            Tensor oh = matmul(attn, vh);
            heads_out = heads_out.defined() ? concat_cols(heads_out, oh) : oh;
        }
        Tensor attn_out = add_rowvec(matmul(heads_out, blk.wo), blk.bo);
        attn_out = dropout(attn_out, cfg.dropout, training, rng.derive("drop.attn", l));
        h = scale_rows(add(h, attn_out), keep);

        Tensor y2 = layer_norm_rows(h, blk.norm2_g, blk.norm2_b);
        Tensor f = gelu(add_rowvec(matmul(y2, blk.ffn_w1), blk.ffn_b1));
        f = dropout(f, cfg.dropout, training, rng.derive("drop.ffn", l));
        f = add_rowvec(matmul(f, blk.ffn_w2), blk.ffn_b2);
        h = scale_rows(add(h, f), keep);
    }

    h = layer_norm_rows(h, p.final_g, p.final_b);
    return scale_rows(h, keep);
}

Theta0Report theta0_separation_check(int64_t hidden_dim) {
    if (hidden_dim < 4) throw InputError("theta0_separation_check: hidden dimension must be >= 4");

    auto [h1, h2] = witness_hypergraphs(WitnessPair::HGPM_SEP);
    EncoderConfig cfg;
    cfg.feature_dim = static_cast<int64_t>(h1.feature_dim());
    cfg.hidden = hidden_dim;
    cfg.layers = 2;
    cfg.heads = 1;
    cfg.dropout = 0.0;
    cfg.max_order = 3;
    cfg.num_views = 1;
    ParamStore store;
    EncoderParams params = EncoderParams::create_witness(store, cfg);
    const DagConfig wcfg = DagConfig::witness();

    // Closed-form targets: the final layer norm applied to the three
    // orthonormal source rows.
    const int64_t d = hidden_dim;
    std::vector<double> basis(3 * d, 0.0);
    basis[0 * d + 0] = 1.0; // center
    basis[1 * d + 1] = 1.0; // obs
    basis[2 * d + 2] = 1.0; // neg
    Tensor v_rows = layer_norm_rows(Tensor::from({3, d}, std::move(basis)), params.final_g,
                                    params.final_b);
    auto v_at = [&](size_t row, int64_t c) { return v_rows.data()[row * d + c]; };

    auto pooled = [&](const Hypergraph& h, VertexId c) {
        TokenSequence seq = linearize(build_dag(h, c, wcfg), wcfg);
        Tensor out = encode(seq, params, /*training=*/false, Rng(0));
        std::vector<double> m(d, 0.0);
        size_t n = 0;
        for (size_t i = 0; i < seq.length; ++i) {
            if (seq.is_pad[i]) continue;
            for (int64_t j = 0; j < d; ++j) m[j] += out.data()[i * d + j];
            ++n;
        }
        for (double& x : m) x /= static_cast<double>(n);
        return m;
    };

    Theta0Report report;
    report.ok = true;
    const std::vector<VertexId> separating = {0, 1, 4, 5};
    const std::vector<VertexId> coincident = {2, 3};
    report.min_separating_norm = 1e308;

    for (VertexId c : separating) {
        auto a = pooled(h1, c), b = pooled(h2, c);
        double norm = 0.0, err = 0.0;
        for (int64_t j = 0; j < d; ++j) {
            const double diff = a[j] - b[j];
            const double predicted = (v_at(0, j) - 3.0 * v_at(2, j) + 2.0 * v_at(1, j)) / 42.0;
            norm = std::max(norm, std::abs(diff));
            err = std::max(err, std::abs(diff - predicted));
        }
        report.per_center_norm.push_back(norm);
        report.max_formula_error = std::max(report.max_formula_error, err);
        report.min_separating_norm = std::min(report.min_separating_norm, norm);
    }
    for (VertexId c : coincident) {
        auto a = pooled(h1, c), b = pooled(h2, c);
        double norm = 0.0;
        for (int64_t j = 0; j < d; ++j) norm = std::max(norm, std::abs(a[j] - b[j]));
        report.per_center_norm.push_back(norm);
        report.max_coincident_norm = std::max(report.max_coincident_norm, norm);
    }
    report.ok = report.max_formula_error <= 1e-12 && report.min_separating_norm > 1e-9 &&
                report.max_coincident_norm == 0.0;
    return report;
}

} // namespace hyperlat
