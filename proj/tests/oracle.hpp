#pragma once

// Test-only brute-force oracles over packed subset masks, independent of the
// library's lattice path. Everything here recomputes from first principles.

#include <optional>
#include <set>
#include <vector>

#include "hyperlat/hypergraph.hpp"
#include "hyperlat/rng.hpp"

namespace oracle {

using hyperlat::Rng;

struct MaskHypergraph {
    size_t n = 0;
    std::set<uint64_t> edges; // non-empty masks

    int indicator(uint64_t s) const { return s != 0 && edges.count(s) ? 1 : 0; }

    int coboundary(uint64_t sub, uint64_t super) const {
        return indicator(super) - indicator(sub);
    }

    // Σ_{T⊆S} (−1)^{|S|−|T|} 1_T by direct subset enumeration.
    long long mobius(uint64_t s) const {
        long long g = 0;
        uint64_t t = s;
        while (true) {
            const int sign = ((__builtin_popcountll(s) - __builtin_popcountll(t)) % 2 == 0) ? 1 : -1;
            g += sign * indicator(t);
            if (t == 0) break;
            t = (t - 1) & s;
        }
        return g;
    }

    bool downward_closed() const {
        for (uint64_t e : edges) {
            uint64_t t = (e - 1) & e;
            while (t != 0) {
                if (!edges.count(t)) return false;
                t = (t - 1) & e;
            }
        }
        return true;
    }
};

inline MaskHypergraph random_mask_hypergraph(size_t n, Rng& rng, double edge_prob = 0.25,
                                             size_t max_edge_size = 4) {
    MaskHypergraph h;
    h.n = n;
    for (uint64_t s = 1; s < (uint64_t{1} << n); ++s) {
        if (static_cast<size_t>(__builtin_popcountll(s)) > max_edge_size) continue;
        if (rng.uniform() < edge_prob) h.edges.insert(s);
    }
    return h;
}

inline hyperlat::Hypergraph to_hypergraph(const MaskHypergraph& mh, size_t feature_dim = 0,
                                          Rng* frng = nullptr) {
    std::vector<hyperlat::VertexSubset> edges;
    for (uint64_t e : mh.edges) edges.push_back(hyperlat::VertexSubset::from_mask(e));
    std::vector<std::vector<double>> features;
    if (feature_dim > 0) {
        features.resize(mh.n, std::vector<double>(feature_dim));
        for (auto& row : features)
            for (double& x : row) x = frng ? frng->normal() : 0.0;
    }
    return hyperlat::Hypergraph(mh.n, std::move(edges), std::move(features));
}

} // namespace oracle
