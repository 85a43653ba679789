#pragma once

#include <map>
#include <vector>

#include "hyperlat/hypergraph.hpp"
#include "hyperlat/readout.hpp"

namespace hyperlat {

struct PlantedPartition {
    Hypergraph h;
    std::vector<int> labels;
};

// Labeled hypergraph with class-pure hyperedges at the given homophily rate
// and per-class Gaussian features (block means at `feature_offset`, unit
// noise). Deterministic by seed.
PlantedPartition synth_planted_partition(int classes, size_t vertices, size_t edge_count,
                                         double homophily, uint64_t seed,
                                         size_t feature_dim = 100,
                                         double feature_offset = 1.5);

struct ComboCorpus {
    Hypergraph h; // observed combinations as hyperedges
    std::vector<ComboSample> samples;
    std::map<size_t, size_t> positives_per_order;
};

struct ComboParams {
    size_t groups = 4;
    size_t feature_dim = 16;
    double feature_noise = 1.0;
    size_t base_count = 56;  // order-2 positive count; halves per extra order
    bool make_negatives = true; // 1:1 Swap negatives
    // Swap replacements come from a different latent group; a same-group
    // swap would preserve the planted interaction and mislabel the sample.
    bool cross_group_negatives = true;
};

// Hierarchical positive combinations: order-2 positives are group-pure
// pairs; each higher-order positive extends a lower-order one inside its
// group, so per-order counts are heavy-tailed and high-order positives sit
// above observed low-order substructure. Negatives perturb positives by
// Swap and never collide with the positive set.
ComboCorpus synth_combos(size_t drug_count, const std::vector<size_t>& orders, uint64_t seed,
                         const ComboParams& params = {});

} // namespace hyperlat
