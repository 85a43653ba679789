#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "hyperlat/lattice.hpp"
#include "hyperlat/rng.hpp"

namespace hyperlat {

enum class TokenSource : uint8_t { Center, Obs, Neg };

const char* to_string(TokenSource s);

// Sampling knobs for target-centered inclusion DAGs. The witness preset
// replaces stochastic sampling with the deterministic mode used by the
// separation checks: keep the center, every observed incident edge, and
// every center-containing 2-subset of those edges as negatives (budgets and
// quotas do not apply there).
struct DagConfig {
    size_t max_order = 3;      // K_max
    size_t per_order_budget = 8; // K_o; per-order override below
    std::map<size_t, size_t> per_order_budget_override;
    size_t neg_quota = 2;        // B^neg_o, in {1, 2}
    std::map<size_t, size_t> neg_quota_override;
    size_t swap_repeats = 1;     // r, in {1, 2, 3}
    size_t num_views = 2;        // V
    uint64_t seed = 0;
    bool witness_preset = false;

    size_t budget_for(size_t order) const;
    size_t quota_for(size_t order) const;
    void validate() const;

    static DagConfig witness() {
        DagConfig cfg;
        cfg.witness_preset = true;
        cfg.num_views = 1;
        cfg.max_order = 3;
        return cfg;
    }
};

struct SubsetToken {
    VertexSubset subset;
    size_t order = 0;
    int exists = 0;           // 1_S
    TokenSource source = TokenSource::Obs;
    size_t view = 0;
    std::vector<double> feature; // mean of member vertex features
};

struct DagEdge {
    size_t sub_index = 0;   // token index of S
    size_t super_index = 0; // token index of S', |S'| = |S| + 1
    std::optional<CompLabel> label;
};

struct InclusionDag {
    VertexId center = 0;
    std::vector<SubsetToken> tokens;
    std::vector<DagEdge> edges;
    std::vector<std::pair<size_t, size_t>> view_ranges; // [begin, end) per view

    // (center, neg, obs) token counts across all views.
    std::array<size_t, 3> source_counts() const;
};

// Negative candidates around c by guarded perturbation of incident observed
// edges (drop a non-center member, add an outside vertex, swap). A candidate
// survives iff it contains c, is unobserved, and has order in [2, K_max].
std::set<VertexSubset> propose_negatives(const Hypergraph& h, VertexId c, const DagConfig& cfg);

// Per-view observed-heavy fill: min(|P_o|, K_o) uniform observed draws per
// order, then min(B^neg_o, K_o − n₊) negative draws; edges are recomputed as
// all adjacent-order nested pairs within the view. Deterministic given
// (hypergraph, c, seed): every draw uses a stream derived from
// (seed, c, view, order).
InclusionDag build_dag(const Hypergraph& h, VertexId c, const DagConfig& cfg);

// Out-degrees into observed supersets, over neg tokens, sorted descending.
std::vector<size_t> neg_out_degree_multiset(const InclusionDag& dag);

// Relation-matrix buckets. `i` is always the query.
int role_pair_bucket(TokenSource query, TokenSource key);
int order_gap_bucket(long long gap);
int overlap_bucket(double jaccard);

// Linearized encoder input: per view, tokens in descending (|S|, S) order
// with the center singleton last, views concatenated and padded to the
// per-view capacity; attribute index 0 is the padding slot everywhere.
// Adjacency-keyed relations (direction, sibling) are view-local;
// content-keyed relations (role pair, order gap, overlap) fire across views.
struct TokenSequence {
    size_t length = 0;
    size_t view_capacity = 0;
    size_t num_views = 0;
    VertexId center = 0;
    size_t feature_dim = 0;

    std::vector<int> order_index;    // pad: 0, else |S|
    std::vector<int> exists_index;   // pad: 0, else 1 + 1_S
    std::vector<int> source_index;   // pad: 0, center: 1, obs: 2, neg: 3
    std::vector<int> view_index;     // pad: 0, else 1 + view
    std::vector<int> position_index; // pad: 0, else 1 + global position
    std::vector<char> is_pad;        // 1 at padding slots
    std::vector<std::vector<double>> features; // zero rows at padding
    std::vector<int> dag_token;      // position → dag token index, −1 at pad
    std::vector<VertexSubset> subsets; // empty subset at pad
    std::vector<size_t> center_positions; // one per view

    // Row-major length × length relation matrices.
    std::vector<int> direction; // 0 none, 1: S_i ⊂ S_j adjacent, 2: S_j ⊂ S_i
    std::vector<int> role_pair;
    std::vector<int> order_gap;
    std::vector<int> overlap;
    std::vector<char> sibling;

    size_t at(size_t i, size_t j) const { return i * length + j; }
    size_t num_real_tokens() const;
    std::vector<size_t> non_pad_positions() const;
    std::vector<size_t> maskable_positions() const; // non-pad, non-center
};

TokenSequence linearize(const InclusionDag& dag, const DagConfig& cfg,
                        size_t position_capacity = 1024);

} // namespace hyperlat
