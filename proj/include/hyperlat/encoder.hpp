#pragma once

#include <vector>

#include "hyperlat/sampler.hpp"
#include "hyperlat/tensor.hpp"

namespace hyperlat {

struct EncoderConfig {
    int64_t feature_dim = 0; // input feature width d_in
    int64_t hidden = 32;     // d
    int64_t layers = 2;      // L
    int64_t heads = 4;       // H, must divide d
    double dropout = 0.1;
    size_t max_order = 3;    // sizes the order table
    size_t num_views = 2;    // sizes the view table
    int64_t position_capacity = 1024;
    int64_t ffn_multiplier = 4;

    // Ablation switches; tables stay allocated so checkpoints are unaffected.
    bool use_direction_bias = true;
    bool use_composition_bias = true;
    bool use_aux_bias = true; // order gap + overlap + sibling

    int64_t head_dim() const { return hidden / heads; }
    void validate() const;
};

// Parameter handles registered into a shared store. Names follow the
// transfer inventory: feature_projection.*, embed.{order,exist,exist_source,
// view,position}, bias.{edge_direction,exist_transition,order_distance,
// overlap_bucket,sibling}, block<i>.*, final_norm.*.
struct EncoderParams {
    EncoderConfig cfg;

    Tensor feat_w1, feat_b1, feat_w2, feat_b2;
    Tensor emb_order, emb_exist, emb_source, emb_view, emb_pos;
    Tensor bias_dir, bias_comp, bias_gap, bias_ovlp, bias_sib;

    struct Block {
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor norm1_g, norm1_b, norm2_g, norm2_b;
        Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    };
    std::vector<Block> blocks;
    Tensor final_g, final_b;

    static EncoderParams create(ParamStore& store, const EncoderConfig& cfg, Rng rng);
    // Zero assignment with orthonormal source rows: the hand-set witness
    // weights under which the residual stream carries the source embedding
    // untouched and attention is uniform. Requires hidden >= 4.
    static EncoderParams create_witness(ParamStore& store, const EncoderConfig& cfg);
};

// Per-position overrides used by masked pretraining: at masked positions the
// feature projection is replaced by the mask token, the existence and source
// lookups by one shared mask row, and role-pair buckets involving a masked
// token by the catch-all bucket 0.
struct MaskInputs {
    std::vector<char> masked; // length of the sequence
    Tensor mask_token;        // [d]
    Tensor attr_mask;         // [d]
};

struct EncodeTrace {
    // Attention rows per layer (heads concatenated by layer-major order).
    std::vector<Tensor> attention;
};

// Layer-0 states: feature-MLP projection plus the five attribute lookups,
// padding rows zeroed.
Tensor embed(const TokenSequence& seq, const EncoderParams& params, bool training, Rng rng,
             const MaskInputs* mask = nullptr);

// L pre-norm blocks of biased attention + FFN, then the final layer norm.
// Returns final states [length, hidden] with padding rows zeroed.
Tensor encode(const TokenSequence& seq, const EncoderParams& params, bool training, Rng rng,
              const MaskInputs* mask = nullptr, EncodeTrace* trace = nullptr);

// Builds the witness parameter assignment, runs the separating pair through
// the deterministic sampling preset at every admissible center, and checks
// the pooled differences against the closed-form prediction.
struct Theta0Report {
    bool ok = false;
    double max_formula_error = 0.0;      // worst |diff − predicted| at separating centers
    double min_separating_norm = 0.0;    // smallest ‖diff‖∞ at separating centers
    double max_coincident_norm = 0.0;    // largest ‖diff‖∞ at coincident centers
    std::vector<double> per_center_norm; // centers 0,1,4,5 then 2,3
};

Theta0Report theta0_separation_check(int64_t hidden_dim);

} // namespace hyperlat
