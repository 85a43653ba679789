#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hyperlat/hypergraph.hpp"

namespace hyperlat {

// Result of bipartite color refinement on the vertex–hyperedge incidence
// graph. Color ids are canonical: assigned by first appearance of the
// (own color, sorted neighbor-color multiset) signature, never hashed, so
// equal signatures get equal ids with no collision risk.
struct ColoringState {
    std::vector<int> vertex_colors;
    std::vector<int> edge_colors;
    size_t iterations_run = 0;
    bool stable = false;
    // First iteration at which the joint partition stopped refining. The
    // iteration-1 colors are definitionally fresh (they fold the trivial
    // edge initialization into content-bearing signatures), so the earliest
    // detectable fixed point is iteration 2.
    size_t stable_iteration = 0;

    size_t num_vertex_classes() const;
    size_t num_edge_classes() const;
};

ColoringState wl_refine(const Hypergraph& h, size_t max_iters = 64);

// True iff at every refinement iteration up to joint stabilization the two
// hypergraphs have pointwise-equal vertex colors and pointwise-equal
// per-vertex incident-edge-color multisets (colors drawn from a shared
// canonical dictionary). Requires equal vertex counts.
bool wl_equivalent(const Hypergraph& h1, const Hypergraph& h2);

// Exhaustive isomorphism search over vertex permutations (lexicographic
// enumeration; the first witness found is returned). Guarded at 10 vertices.
// A witness π maps edges of h1 onto edges of h2 and satisfies
// X2[π(v)] = X1[v].
std::optional<std::vector<VertexId>> brute_force_isomorphic(const Hypergraph& h1,
                                                            const Hypergraph& h2);

// Sorted multiset {|e ∩ e'|} over unordered pairs of distinct hyperedges.
std::vector<size_t> pair_intersection_multiset(const Hypergraph& h);

// Reference hyperedge message-passing encoder: strictly alternates
// edge-message / vertex / edge updates, each a deterministic function of
// (own state, incident-state multiset).
//   Canonical  — injective-on-observed-signatures updates realized with a
//                first-appearance dictionary; outputs are one-hot lifts of
//                the final canonical states. The expressivity-test instance.
//   MeanField  — continuous mean aggregation; the trainable-baseline feature
//                extractor.
struct MpEncoderConfig {
    enum class Mode { Canonical, MeanField };
    size_t depth = 2;
    Mode mode = Mode::Canonical;
};

struct MpEncoding {
    std::vector<std::vector<double>> vertex_features;
    std::vector<std::vector<double>> edge_features; // sorted: a canonical multiset
};

MpEncoding mp_encode(const Hypergraph& h, const MpEncoderConfig& cfg);

// Hard-coded witness pairs with constant features. MP_BLIND is the
// isomorphic pair every hyperedge-MP encoder collapses on; HGPM_SEP is the
// non-isomorphic WL-equivalent pair. Construction self-checks its stated
// structural properties (uniformity, degrees, intersection multisets).
enum class WitnessPair { MP_BLIND, HGPM_SEP };

std::pair<Hypergraph, Hypergraph> witness_hypergraphs(WitnessPair which);

} // namespace hyperlat
