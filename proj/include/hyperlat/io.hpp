#pragma once

#include <map>
#include <string>
#include <vector>

#include "hyperlat/hypergraph.hpp"
#include "hyperlat/pretrain.hpp"
#include "hyperlat/readout.hpp"
#include "hyperlat/sampler.hpp"

namespace hyperlat {

// Raised on malformed files; the message carries the offending line number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text hypergraph format:
//   line 1:  "hypergraph <num_vertices> <feature_dim>"
//   rest:    one hyperedge per line, ascending space-separated vertex ids
// Features live in a companion "<path>.features" table (one row per vertex,
// written with max_digits10 so floats round-trip exactly); labels in
// "<path>.labels" (one integer per vertex). Saving canonicalizes edge order,
// so save(load(f)) is byte-identical for canonical files.
Hypergraph load_hypergraph(const std::string& path);
void save_hypergraph(const Hypergraph& h, const std::string& path);

std::vector<int> load_labels(const std::string& path);
void save_labels(const std::vector<int>& labels, const std::string& path);

// Combination-sample table: one line per sample,
//   "<label> <side-effect-id or -> <ascending drug ids...>"
std::vector<ComboSample> load_combos(const std::string& path);
void save_combos(const std::vector<ComboSample>& samples, const std::string& path);

// Flat key-value run configuration ("key = value" lines, '#' comments).
// Unknown keys are rejected; every key has a default, and the effective
// config is echoed into every output for provenance.
struct RunConfig {
    uint64_t seed = 0;

    // inclusion DAG
    size_t max_order = 3;
    size_t per_order_budget = 8;
    size_t neg_quota = 2;
    size_t swap_repeats = 1;
    size_t num_views = 2;

    // encoder
    int64_t hidden_dim = 32;
    int64_t layers = 2;
    int64_t heads = 4;
    double dropout = 0.1;
    int64_t ffn_multiplier = 4;

    // pretraining (fixed defaults)
    double mask_ratio = 0.2;
    double lambda_exist = 1.0;
    double ema_decay = 0.999;
    size_t pretrain_epochs = 50;
    size_t pretrain_patience = 5;
    size_t pretrain_batch = 128;
    double pretrain_lr = 5e-4;
    double pretrain_weight_decay = 5e-4;
    double clip_norm = 1.0;

    // finetuning
    size_t finetune_epochs = 100;
    size_t finetune_patience = 10;
    size_t finetune_batch = 32;
    double finetune_lr = 1e-3;
    double finetune_weight_decay = 5e-4;

    static RunConfig load(const std::string& path);
    static RunConfig parse(const std::string& text);
    std::string to_text() const; // every key, effective values

    DagConfig dag() const;
    EncoderConfig encoder(int64_t feature_dim) const;
    PretrainConfig pretrain() const;
    TrainOptions finetune() const;
};

} // namespace hyperlat
