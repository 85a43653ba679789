#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyperlat/checkpoint.hpp"
#include "hyperlat/encoder.hpp"
#include "hyperlat/optim.hpp"

namespace hyperlat {

// Name-prefix classification of every parameter into the transferable
// backbone (feature projection, attribute tables, bias tables, blocks,
// final norm) and the reinitialized remainder (pretrain heads, mask rows,
// teacher, readouts). Together the two lists cover every parameter.
struct TransferManifest {
    static const std::vector<std::string>& transfer_prefixes();
    static const std::vector<std::string>& reinit_prefixes();
    static bool is_transferable(const std::string& name);
    static bool is_reinit(const std::string& name);
};

struct TransferReport {
    std::vector<std::string> loaded;
    std::vector<std::string> missing;       // transferable but absent from the archive
    std::vector<std::string> reinitialized; // left at fresh initialization

    bool complete() const { return missing.empty(); }
};

// Non-strict load: copies manifest-listed parameters by name, requires exact
// shape agreement on anything it loads, reports the rest.
TransferReport transfer(const CheckpointData& checkpoint, const ParamStore& store);

// ---- node classification readout ----

struct NodeReadout {
    Tensor pool_w;                          // [d]
    Tensor pool_W;                          // [d, d]
    Tensor cls_w1, cls_b1, cls_w2, cls_b2;  // 2d → d → classes

    static NodeReadout create(ParamStore& store, const EncoderConfig& cfg, int num_classes,
                              Rng rng);
};

struct NodeModel {
    ParamStore store;
    EncoderConfig cfg;
    EncoderParams encoder;
    NodeReadout readout;
    int num_classes = 0;

    static NodeModel create(const EncoderConfig& cfg, int num_classes, uint64_t seed);
};

// Attention-pooled context concatenated with the center state (mean over
// views), decoded to class logits [1, classes].
Tensor node_logits(const NodeModel& model, const TokenSequence& seq, bool training, Rng rng);

// Pool weights α over non-pad tokens, for invariant checks.
std::vector<double> node_pool_weights(const NodeModel& model, const TokenSequence& seq);

// ---- combination scoring readout ----

struct ComboReadout {
    Tensor effect_table;                    // [num_effects, d]
    Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2; // 2d → d → 1

    static ComboReadout create(ParamStore& store, const EncoderConfig& cfg, int num_effects,
                               Rng rng);
};

struct ComboModel {
    ParamStore store;
    EncoderConfig cfg;
    EncoderParams encoder;
    ComboReadout readout;
    int num_effects = 0;

    static ComboModel create(const EncoderConfig& cfg, int num_effects, uint64_t seed);
};

// Score logit for a drug combination: one DAG per member drug, mean of
// center final states, concatenated with the side-effect row (exact zero
// when unconditional). |drugs| >= 2; unknown side-effect ids are errors.
Tensor combo_logit(const ComboModel& model, const Hypergraph& h, const DagConfig& dag_cfg,
                   const VertexSubset& drugs, std::optional<int> side_effect, bool training,
                   Rng rng);

double combo_score(const ComboModel& model, const Hypergraph& h, const DagConfig& dag_cfg,
                   const VertexSubset& drugs, std::optional<int> side_effect = std::nullopt);

// ---- finetuning loops ----

struct TrainOptions {
    size_t epochs = 100;
    size_t patience = 10;
    size_t batch_size = 32;
    double learning_rate = 1e-3;
    double weight_decay = 5e-4;
    double clip_norm = 1.0;
    uint64_t seed = 0;
};

struct FitResult {
    double best_val_metric = 0.0; // accuracy (node) or AUROC (combo)
    size_t best_epoch = 0;
    size_t epochs_run = 0;
};

FitResult train_node_readout(NodeModel& model, const std::vector<TokenSequence>& seqs,
                             const std::vector<int>& labels, const std::vector<size_t>& train_idx,
                             const std::vector<size_t>& val_idx, const TrainOptions& opt);

std::vector<int> predict_node(const NodeModel& model, const std::vector<TokenSequence>& seqs,
                              const std::vector<size_t>& idx);

struct ComboSample {
    VertexSubset drugs;
    std::optional<int> side_effect;
    double label = 0.0; // 1 observed, 0 negative
};

FitResult train_combo_readout(ComboModel& model, const Hypergraph& h, const DagConfig& dag_cfg,
                              const std::vector<ComboSample>& samples,
                              const std::vector<size_t>& train_idx,
                              const std::vector<size_t>& val_idx, const TrainOptions& opt);

// Scores with the queried hyperedge hidden from DAG construction, so an
// observed positive cannot read its own existence bit.
std::vector<double> score_combos_leakage_safe(const ComboModel& model, const Hypergraph& h,
                                              const DagConfig& dag_cfg,
                                              const std::vector<ComboSample>& samples,
                                              const std::vector<size_t>& idx);

} // namespace hyperlat
