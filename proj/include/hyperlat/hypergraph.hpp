#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hyperlat/errors.hpp"
#include "hyperlat/subset.hpp"

namespace hyperlat {

using EdgeId = uint32_t;

// Immutable hypergraph: vertex universe [0, num_vertices), a duplicate-free
// set of non-empty hyperedges, an optional per-vertex feature matrix, and a
// per-vertex incidence index. Safe to share across threads after construction.
class Hypergraph {
public:
    Hypergraph(size_t num_vertices,
               std::vector<VertexSubset> hyperedges,
               std::vector<std::vector<double>> features = {});

    size_t num_vertices() const { return num_vertices_; }
    size_t num_edges() const { return edges_.size(); }
    size_t feature_dim() const { return feature_dim_; }

    const std::vector<VertexSubset>& hyperedges() const { return edges_; }
    const VertexSubset& edge(EdgeId e) const { return edges_[e]; }

    bool has_edge(const VertexSubset& s) const { return lookup_.count(s) > 0; }
    std::optional<EdgeId> edge_id(const VertexSubset& s) const;

    // Incident hyperedge ids of a vertex, ascending.
    std::span<const EdgeId> incident(VertexId v) const;
    size_t degree(VertexId v) const { return membership_[v].size(); }

    std::span<const double> feature_row(VertexId v) const;
    // Mean of member feature rows; the token feature of a subset.
    std::vector<double> mean_feature(const VertexSubset& s) const;

    // Copy with one hyperedge removed (no-op if absent). Used by evaluation
    // harnesses that must hide a queried combination.
    Hypergraph without_edge(const VertexSubset& s) const;

    // Rebuilds the incidence index from the edge list and compares; the
    // constructor maintains it, so this only fires if memory was corrupted.
    bool check_membership_index() const;

private:
    size_t num_vertices_ = 0;
    size_t feature_dim_ = 0;
    std::vector<VertexSubset> edges_;
    std::vector<std::vector<double>> features_;
    std::vector<std::vector<EdgeId>> membership_;
    std::unordered_map<VertexSubset, EdgeId, SubsetHash> lookup_;
};

} // namespace hyperlat
