#include "hyperlat/hypergraph.hpp"

#include <algorithm>

namespace hyperlat {

Hypergraph::Hypergraph(size_t num_vertices,
                       std::vector<VertexSubset> hyperedges,
                       std::vector<std::vector<double>> features)
    : num_vertices_(num_vertices),
      edges_(std::move(hyperedges)),
      features_(std::move(features)) {
    std::sort(edges_.begin(), edges_.end());
    for (size_t i = 0; i + 1 < edges_.size(); ++i)
        if (edges_[i] == edges_[i + 1])
            throw InputError("Hypergraph: duplicate hyperedge " + edges_[i].to_string());
    membership_.resize(num_vertices_);
    for (EdgeId e = 0; e < edges_.size(); ++e) {
        const VertexSubset& s = edges_[e];
        if (s.empty()) throw InputError("Hypergraph: empty hyperedge is not allowed");
        if (s.max_id() >= num_vertices_)
            throw InputError("Hypergraph: hyperedge " + s.to_string() + " has vertex id out of range");
        for (VertexId v : s.members()) membership_[v].push_back(e);
        lookup_.emplace(s, e);
    }
    if (!features_.empty()) {
        if (features_.size() != num_vertices_)
            throw InputError("Hypergraph: feature matrix must have one row per vertex");
        feature_dim_ = features_[0].size();
        for (const auto& row : features_)
            if (row.size() != feature_dim_)
                throw InputError("Hypergraph: ragged feature matrix");
    }
}

std::optional<EdgeId> Hypergraph::edge_id(const VertexSubset& s) const {
    auto it = lookup_.find(s);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::span<const EdgeId> Hypergraph::incident(VertexId v) const {
    if (v >= num_vertices_) throw InputError("Hypergraph::incident: vertex id out of range");
    return membership_[v];
}

std::span<const double> Hypergraph::feature_row(VertexId v) const {
    if (v >= num_vertices_) throw InputError("Hypergraph::feature_row: vertex id out of range");
    if (features_.empty()) throw InputError("Hypergraph::feature_row: hypergraph carries no features");
    return features_[v];
}

std::vector<double> Hypergraph::mean_feature(const VertexSubset& s) const {
    std::vector<double> out(feature_dim_, 0.0);
    if (s.empty()) return out;
    for (VertexId v : s.members()) {
        auto row = feature_row(v);
        for (size_t i = 0; i < feature_dim_; ++i) out[i] += row[i];
    }
    for (double& x : out) x /= static_cast<double>(s.size());
    return out;
}

Hypergraph Hypergraph::without_edge(const VertexSubset& s) const {
    std::vector<VertexSubset> kept;
    kept.reserve(edges_.size());
    for (const auto& e : edges_)
        if (!(e == s)) kept.push_back(e);
    return Hypergraph(num_vertices_, std::move(kept), features_);
}

bool Hypergraph::check_membership_index() const {
    std::vector<std::vector<EdgeId>> rebuilt(num_vertices_);
    for (EdgeId e = 0; e < edges_.size(); ++e)
        for (VertexId v : edges_[e].members()) rebuilt[v].push_back(e);
    return rebuilt == membership_;
}

} // namespace hyperlat
