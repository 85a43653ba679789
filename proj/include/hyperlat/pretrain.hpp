#pragma once

#include <vector>

#include "hyperlat/checkpoint.hpp"
#include "hyperlat/encoder.hpp"
#include "hyperlat/optim.hpp"

namespace hyperlat {

struct PretrainConfig {
    double mask_ratio = 0.2;      // over non-center tokens
    double lambda_exist = 1.0;
    size_t epochs = 50;
    size_t patience = 5;          // early stop on validation loss
    size_t batch_size = 128;
    double learning_rate = 5e-4;
    double weight_decay = 5e-4;
    double clip_norm = 1.0;
    double ema_decay = 0.999;
    uint64_t seed = 0;

    void validate() const;
};

// Mask token, prediction heads and the EMA teacher. The teacher mirrors the
// feature projector's shapes (it is the projector's EMA shadow) and never
// receives gradients.
struct PretrainHeads {
    Tensor mask_token; // [d], N(0, 0.02²) init
    Tensor attr_mask;  // shared replacement row for existence+source lookups
    Tensor sem_w1, sem_b1, sem_w2, sem_b2; // d → d → d
    Tensor ex_w1, ex_b1, ex_w2, ex_b2;     // d → d/2 → 1
    Tensor teacher_w1, teacher_b1, teacher_w2, teacher_b2;

    static PretrainHeads create(ParamStore& store, const EncoderConfig& cfg, Rng rng,
                                const EncoderParams& encoder);
};

struct PretrainModel {
    ParamStore store;
    EncoderConfig cfg;
    EncoderParams encoder;
    PretrainHeads heads;

    static PretrainModel create(const EncoderConfig& cfg, uint64_t seed);

    std::vector<Tensor> student_params() const;   // everything that trains
    std::vector<Tensor> teacher_params() const;
    std::vector<Tensor> projector_params() const; // EMA source for the teacher
};

struct MaskSelection {
    std::vector<size_t> positions; // sorted
    std::vector<char> flags;       // per sequence position
};

// Uniform draw of round(ρ·|non-center non-pad|) positions, at least one.
// Center and padding are never masked.
MaskSelection apply_mask(const TokenSequence& seq, double mask_ratio, Rng rng);

// Teacher regression targets z_S = Teacher(x_S), tape-free.
Tensor teacher_targets(const PretrainModel& model, const TokenSequence& seq,
                       const std::vector<size_t>& positions);

struct PretrainLoss {
    Tensor total;
    double semantic = 0.0;
    double existence = 0.0;
    Tensor exist_logits;              // [#non-pad]
    std::vector<double> exist_labels; // aligned with exist_logits
};

// Masked-reconstruction objective: mean squared teacher regression over the
// masked set plus λ·BCE on the existence logit at every non-padding token.
PretrainLoss pretrain_loss(const PretrainModel& model, const TokenSequence& seq,
                           const MaskSelection& mask, double lambda_exist, bool training,
                           Rng rng);

struct EpochRecord {
    size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_exist_auroc = 0.0;
};

struct PretrainResult {
    CheckpointData checkpoint; // best validation snapshot
    std::vector<EpochRecord> curve;
    size_t stopped_epoch = 0;
    double best_val_loss = 0.0;
    std::vector<VertexId> val_centers; // the held-out split, by center vertex
};

// AdamW + global-norm clip + per-step EMA teacher update, early stopping on
// a held-out 10% validation split disjoint by center vertex. A corpus
// smaller than the batch size trains as a single batch; center-only
// sequences (isolated targets) are skipped, having nothing to mask.
PretrainResult pretrain_loop(PretrainModel& model, const std::vector<TokenSequence>& corpus,
                             const PretrainConfig& cfg);

} // namespace hyperlat
