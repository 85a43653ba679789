#pragma once

#include <map>
#include <string>
#include <vector>

#include "hyperlat/io.hpp"
#include "hyperlat/synth.hpp"
#include "hyperlat/wl.hpp"

namespace hyperlat {

// One linearized sequence per target vertex, built in parallel across
// `workers` threads (0 = available parallelism). Deterministic regardless of
// worker count: every DAG derives its streams from (seed, center).
std::vector<TokenSequence> build_corpus(const Hypergraph& h, const DagConfig& cfg,
                                        size_t workers = 0);

// Structural verification of the separating constructions: intersection
// multisets, non-isomorphism, WL collapse and equivalence, encoder-collapse
// at depths 1–8, token/source counts and label-restricted out-degrees at
// every admissible center, the witness-parameter pooled-difference identity,
// and the classifier coin-flip bound on the blind pair.
struct WitnessReport {
    bool ok = true;
    std::vector<std::string> lines; // "name = value [ok|FAIL]" records

    void record(const std::string& name, const std::string& value, bool pass);
};

WitnessReport witness_report();

// Cross-order generalization harness on a synthetic combination corpus:
// fixed training on the two lowest orders versus progressive training on
// all orders below the test order, for the subset-token model and the
// message-passing baseline readout. The reported gap is the mean
// progressive-minus-fixed AUROC over the test orders.
struct CrossOrderResult {
    std::map<size_t, double> fixed_subset, progressive_subset;
    std::map<size_t, double> fixed_mp, progressive_mp;
    double gap_subset = 0.0;
    double gap_mp = 0.0;
};

CrossOrderResult cross_order_eval(const ComboCorpus& corpus, const RunConfig& cfg,
                                  const std::vector<size_t>& test_orders);

// Pretrained-then-finetuned versus scratch accuracy on a planted-partition
// node task with a small label budget, averaged over finetune seeds. The
// pretraining corpus stacks `pretrain_repeats` independently seeded DAG
// samples per target; finetuning sees one sequence per target.
struct BenefitResult {
    double pretrained_mean = 0.0;
    double scratch_mean = 0.0;
    std::vector<double> pretrained_acc, scratch_acc;
};

BenefitResult pretrain_benefit_check(const PlantedPartition& task, const RunConfig& cfg,
                                     size_t labels_per_class, size_t n_seeds,
                                     size_t pretrain_repeats = 1);

// Node-classification split helper: `labels_per_class` training examples per
// class, an equal-size validation budget, everything else test.
struct Splits {
    std::vector<size_t> train, val, test;
};

Splits label_budget_split(const std::vector<int>& labels, int num_classes,
                          size_t labels_per_class, uint64_t seed);

Splits fraction_split(size_t count, double train_frac, double val_frac, uint64_t seed);

} // namespace hyperlat
