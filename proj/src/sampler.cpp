#include "hyperlat/sampler.hpp"

#include <algorithm>

namespace hyperlat {

const char* to_string(TokenSource s) {
    switch (s) {
        case TokenSource::Center: return "center";
        case TokenSource::Obs: return "obs";
        case TokenSource::Neg: return "neg";
    }
    return "?";
}

size_t DagConfig::budget_for(size_t order) const {
    auto it = per_order_budget_override.find(order);
    return it == per_order_budget_override.end() ? per_order_budget : it->second;
}

size_t DagConfig::quota_for(size_t order) const {
    auto it = neg_quota_override.find(order);
    return it == neg_quota_override.end() ? neg_quota : it->second;
}

void DagConfig::validate() const {
    if (max_order < 2) throw InputError("DagConfig: max_order must be >= 2");
    if (num_views < 1) throw InputError("DagConfig: num_views must be >= 1");
    if (witness_preset) return; // budgets and quotas do not apply
    if (swap_repeats < 1 || swap_repeats > 3)
        throw InputError("DagConfig: swap_repeats must be in {1,2,3}");
    for (size_t o = 2; o <= max_order; ++o) {
        if (budget_for(o) < 1) throw InputError("DagConfig: per-order budget must be >= 1");
        const size_t q = quota_for(o);
        if (q < 1 || q > 2) throw InputError("DagConfig: neg quota must be in {1,2}");
    }
    for (const auto& [o, _] : per_order_budget_override)
        if (o < 2 || o > max_order)
            throw InputError("DagConfig: budget override order outside [2, max_order]");
    for (const auto& [o, _] : neg_quota_override)
        if (o < 2 || o > max_order)
            throw InputError("DagConfig: quota override order outside [2, max_order]");
}

std::array<size_t, 3> InclusionDag::source_counts() const {
    std::array<size_t, 3> counts{0, 0, 0}; // center, neg, obs
    for (const auto& t : tokens) {
        if (t.source == TokenSource::Center) ++counts[0];
        else if (t.source == TokenSource::Neg) ++counts[1];
        else ++counts[2];
    }
    return counts;
}

namespace {

// One uniform draw from V \ e, by index skipping.
std::optional<VertexId> draw_outside(const Hypergraph& h, const VertexSubset& e, Rng& rng) {
    const size_t outside = h.num_vertices() - e.size();
    if (outside == 0) return std::nullopt;
    size_t k = rng.below(outside);
    for (VertexId u = 0; u < h.num_vertices(); ++u) {
        if (e.contains(u)) continue;
        if (k == 0) return u;
        --k;
    }
    return std::nullopt;
}

void keep_if_valid(const Hypergraph& h, VertexId c, const DagConfig& cfg,
                   const VertexSubset& s, std::set<VertexSubset>& out) {
    if (!s.contains(c)) return;
    if (s.size() < 2 || s.size() > cfg.max_order) return;
    if (h.has_edge(s)) return;
    out.insert(s);
}

std::set<VertexSubset> propose_negatives_impl(const Hypergraph& h, VertexId c,
                                              const DagConfig& cfg, Rng rng) {
    std::set<VertexSubset> out;
    if (cfg.witness_preset) {
        // All center-containing 2-subsets of the observed incident edges.
        for (EdgeId eid : h.incident(c)) {
            const VertexSubset& e = h.edge(eid);
            for (VertexId v : e.members())
                if (v != c) keep_if_valid(h, c, cfg, VertexSubset{c, v}, out);
        }
        return out;
    }

    for (EdgeId eid : h.incident(c)) {
        const VertexSubset& e = h.edge(eid);
        std::vector<VertexId> non_center;
        for (VertexId v : e.members())
            if (v != c) non_center.push_back(v);

        if (e.size() > 2 && !non_center.empty()) {
            Rng r = rng.derive("drop", eid);
            VertexId v = non_center[r.below(non_center.size())];
            keep_if_valid(h, c, cfg, e.without(v), out);
        }
        if (e.size() < cfg.max_order) {
            // The add universe can be huge; draw at most r + 2 uniform
            // proposals per edge rather than enumerating it.
            Rng r = rng.derive("add", eid);
            for (size_t k = 0; k < cfg.swap_repeats + 2; ++k)
                if (auto u = draw_outside(h, e, r)) keep_if_valid(h, c, cfg, e.with(*u), out);
        }
        if (!non_center.empty()) {
            Rng r = rng.derive("swap", eid);
            for (size_t k = 0; k < cfg.swap_repeats; ++k) {
                VertexId v = non_center[r.below(non_center.size())];
                if (auto u = draw_outside(h, e, r))
                    keep_if_valid(h, c, cfg, e.without(v).with(*u), out);
            }
        }
    }
    return out;
}

// Uniform sample of k items from a lexicographically ordered pool
// (reservoir, algorithm R), returned in canonical order.
std::vector<VertexSubset> reservoir_draw(const std::vector<VertexSubset>& pool, size_t k, Rng& rng) {
    if (k >= pool.size()) return pool;
    std::vector<VertexSubset> res(pool.begin(), pool.begin() + k);
    for (size_t i = k; i < pool.size(); ++i) {
        const size_t j = rng.below(i + 1);
        if (j < k) res[j] = pool[i];
    }
    std::sort(res.begin(), res.end());
    return res;
}

} // namespace

std::set<VertexSubset> propose_negatives(const Hypergraph& h, VertexId c, const DagConfig& cfg) {
    if (c >= h.num_vertices()) throw InputError("propose_negatives: center out of range");
    cfg.validate();
    return propose_negatives_impl(h, c, cfg, Rng(cfg.seed).derive("neg", c));
}

InclusionDag build_dag(const Hypergraph& h, VertexId c, const DagConfig& cfg) {
    if (c >= h.num_vertices()) throw InputError("build_dag: center out of range");
    cfg.validate();

    InclusionDag dag;
    dag.center = c;
    const Rng base(cfg.seed);

    for (size_t view = 0; view < cfg.num_views; ++view) {
        const size_t begin = dag.tokens.size();
        Rng view_rng = base.derive("view", c, view);

        auto negatives = propose_negatives_impl(h, c, cfg, view_rng.derive("neg", c));

        std::vector<VertexSubset> picked;
        picked.push_back(VertexSubset{c});
        for (size_t o = 2; o <= cfg.max_order; ++o) {
            std::vector<VertexSubset> observed;
            for (EdgeId eid : h.incident(c))
                if (h.edge(eid).size() == o) observed.push_back(h.edge(eid));
            std::sort(observed.begin(), observed.end());

            std::vector<VertexSubset> negs;
            for (const auto& s : negatives)
                if (s.size() == o) negs.push_back(s);

            if (cfg.witness_preset) {
                for (auto& s : observed) picked.push_back(std::move(s));
                for (auto& s : negs) picked.push_back(std::move(s));
                continue;
            }
            const size_t cap = cfg.budget_for(o);
            Rng obs_rng = view_rng.derive("obs", o);
            auto obs_draw = reservoir_draw(observed, std::min(observed.size(), cap), obs_rng);
            const size_t n_minus = std::min(cfg.quota_for(o), cap - obs_draw.size());
            Rng neg_rng = view_rng.derive("negdraw", o);
            auto neg_draw = reservoir_draw(negs, std::min(negs.size(), n_minus), neg_rng);
            for (auto& s : obs_draw) picked.push_back(std::move(s));
            for (auto& s : neg_draw) picked.push_back(std::move(s));
        }

        for (auto& s : picked) {
            SubsetToken t;
            t.order = s.size();
            t.exists = indicator(h, s);
            t.source = (s.size() == 1) ? TokenSource::Center
                       : (t.exists ? TokenSource::Obs : TokenSource::Neg);
            t.view = view;
            if (h.feature_dim() > 0) t.feature = h.mean_feature(s);
            t.subset = std::move(s);
            dag.tokens.push_back(std::move(t));
        }
        const size_t end = dag.tokens.size();
        dag.view_ranges.emplace_back(begin, end);
        picked.clear();

        // Every adjacent-order nested pair within the view becomes an edge;
        // the stored label is recomputed from the hypergraph, and both-absent
        // pairs keep an empty label (the edge is structural either way).
        for (size_t i = begin; i < end; ++i)
            for (size_t j = begin; j < end; ++j) {
                if (i == j) continue;
                const auto& a = dag.tokens[i];
                const auto& b = dag.tokens[j];
                if (a.order + 1 != b.order) continue;
                if (!a.subset.is_covered_by(b.subset)) continue;
                dag.edges.push_back({i, j, comp_label(h, a.subset, b.subset)});
            }
    }
    return dag;
}

std::vector<size_t> neg_out_degree_multiset(const InclusionDag& dag) {
    std::vector<size_t> out;
    for (size_t i = 0; i < dag.tokens.size(); ++i) {
        if (dag.tokens[i].source != TokenSource::Neg) continue;
        size_t deg = 0;
        for (const auto& e : dag.edges)
            if (e.sub_index == i && dag.tokens[e.super_index].source == TokenSource::Obs) ++deg;
        out.push_back(deg);
    }
    std::sort(out.rbegin(), out.rend());
    return out;
}

int role_pair_bucket(TokenSource query, TokenSource key) {
    using TS = TokenSource;
    if (query == TS::Obs && key == TS::Obs) return 1;
    if (query == TS::Obs && key == TS::Neg) return 2;
    if (query == TS::Neg && key == TS::Obs) return 3;
    if (query == TS::Neg && key == TS::Neg) return 4;
    if (query == TS::Center && key == TS::Obs) return 5;
    if (query == TS::Center && key == TS::Neg) return 6;
    return 0; // catch-all, including pairs whose key is the center
}

int order_gap_bucket(long long gap) {
    if (gap <= -3) return 0;
    if (gap >= 3) return 6;
    return static_cast<int>(gap + 3);
}

int overlap_bucket(double jaccard) {
    if (jaccard >= 1.0) return 4; // identical content
    if (jaccard >= 0.75) return 3;
    if (jaccard >= 0.5) return 2;
    if (jaccard >= 0.25) return 1;
    return 0;
}

size_t TokenSequence::num_real_tokens() const {
    size_t n = 0;
    for (char p : is_pad)
        if (!p) ++n;
    return n;
}

std::vector<size_t> TokenSequence::non_pad_positions() const {
    std::vector<size_t> out;
    for (size_t i = 0; i < length; ++i)
        if (!is_pad[i]) out.push_back(i);
    return out;
}

std::vector<size_t> TokenSequence::maskable_positions() const {
    std::vector<size_t> out;
    for (size_t i = 0; i < length; ++i)
        if (!is_pad[i] && source_index[i] != 1) out.push_back(i);
    return out;
}

TokenSequence linearize(const InclusionDag& dag, const DagConfig& cfg, size_t position_capacity) {
    size_t budget_cap = 1;
    for (size_t o = 2; o <= cfg.max_order; ++o) budget_cap += cfg.budget_for(o);
    size_t max_view_tokens = 0;
    for (const auto& [b, e] : dag.view_ranges) max_view_tokens = std::max(max_view_tokens, e - b);
    // Regular configs bound every view by the budgets; the witness preset can
    // exceed them, so the capacity accommodates whichever is larger.
    const size_t cap = std::max(budget_cap, max_view_tokens);
    const size_t num_views = dag.view_ranges.size();
    const size_t total = cap * num_views;
    if (total + 1 > position_capacity)
        throw ResourceError("linearize: sequence length " + std::to_string(total) +
                            " exceeds position capacity " + std::to_string(position_capacity));

    size_t feature_dim = 0;
    for (const auto& t : dag.tokens) feature_dim = std::max(feature_dim, t.feature.size());

    TokenSequence seq;
    seq.length = total;
    seq.view_capacity = cap;
    seq.num_views = num_views;
    seq.center = dag.center;
    seq.feature_dim = feature_dim;
    seq.order_index.assign(total, 0);
    seq.exists_index.assign(total, 0);
    seq.source_index.assign(total, 0);
    seq.view_index.assign(total, 0);
    seq.position_index.assign(total, 0);
    seq.is_pad.assign(total, 1);
    seq.features.assign(total, std::vector<double>(feature_dim, 0.0));
    seq.dag_token.assign(total, -1);
    seq.subsets.assign(total, VertexSubset{});

    for (size_t view = 0; view < num_views; ++view) {
        auto [b, e] = dag.view_ranges[view];
        std::vector<size_t> idx;
        for (size_t i = b; i < e; ++i) idx.push_back(i);
        // Descending (|S|, S); the center singleton is the unique order-1
        // token, so it lands on the view's final non-pad slot.
        std::sort(idx.begin(), idx.end(), [&](size_t x, size_t y) {
            return dag.tokens[y].subset < dag.tokens[x].subset;
        });
        for (size_t k = 0; k < idx.size(); ++k) {
            const size_t pos = view * cap + k;
            const SubsetToken& t = dag.tokens[idx[k]];
            seq.order_index[pos] = static_cast<int>(t.order);
            seq.exists_index[pos] = 1 + t.exists;
            seq.source_index[pos] = t.source == TokenSource::Center ? 1
                                    : t.source == TokenSource::Obs  ? 2
                                                                    : 3;
            seq.view_index[pos] = static_cast<int>(1 + view);
            seq.position_index[pos] = static_cast<int>(1 + pos);
            seq.is_pad[pos] = 0;
            if (!t.feature.empty()) seq.features[pos] = t.feature;
            seq.dag_token[pos] = static_cast<int>(idx[k]);
            seq.subsets[pos] = t.subset;
            if (t.source == TokenSource::Center) seq.center_positions.push_back(pos);
        }
    }

    // Position of each dag token in the sequence, for edge-keyed relations.
    std::vector<int> pos_of(dag.tokens.size(), -1);
    for (size_t p = 0; p < total; ++p)
        if (seq.dag_token[p] >= 0) pos_of[seq.dag_token[p]] = static_cast<int>(p);

    seq.direction.assign(total * total, 0);
    seq.role_pair.assign(total * total, 0);
    seq.order_gap.assign(total * total, 3);
    seq.overlap.assign(total * total, 0);
    seq.sibling.assign(total * total, 0);

    for (const auto& edge : dag.edges) {
        const int pi = pos_of[edge.sub_index];
        const int pj = pos_of[edge.super_index];
        if (pi < 0 || pj < 0) continue;
        seq.direction[seq.at(pi, pj)] = 1;
        seq.direction[seq.at(pj, pi)] = 2;
    }

    // Adjacent sub/super neighbor sets per token, for the sibling gate.
    std::vector<std::vector<size_t>> subs(dag.tokens.size()), supers(dag.tokens.size());
    for (const auto& edge : dag.edges) {
        supers[edge.sub_index].push_back(edge.super_index);
        subs[edge.super_index].push_back(edge.sub_index);
    }
    auto shares = [](const std::vector<size_t>& a, const std::vector<size_t>& b) {
        for (size_t x : a)
            for (size_t y : b)
                if (x == y) return true;
        return false;
    };

    auto src_of = [&](size_t pos) {
        const int s = seq.source_index[pos];
        return s == 1 ? TokenSource::Center : s == 2 ? TokenSource::Obs : TokenSource::Neg;
    };

    for (size_t i = 0; i < total; ++i) {
        if (seq.is_pad[i]) continue;
        for (size_t j = 0; j < total; ++j) {
            if (seq.is_pad[j]) continue;
            const size_t k = seq.at(i, j);
            seq.role_pair[k] = role_pair_bucket(src_of(i), src_of(j));
            seq.order_gap[k] = order_gap_bucket(static_cast<long long>(seq.order_index[i]) -
                                                static_cast<long long>(seq.order_index[j]));
            const double inter = static_cast<double>(seq.subsets[i].intersection_size(seq.subsets[j]));
            const double uni = static_cast<double>(seq.subsets[i].union_size(seq.subsets[j]));
            seq.overlap[k] = overlap_bucket(uni == 0.0 ? 0.0 : inter / uni);
            if (i != j && seq.view_index[i] == seq.view_index[j] &&
                !(seq.subsets[i] == seq.subsets[j])) {
                const size_t ti = static_cast<size_t>(seq.dag_token[i]);
                const size_t tj = static_cast<size_t>(seq.dag_token[j]);
                if (shares(subs[ti], subs[tj]) || shares(supers[ti], supers[tj]))
                    seq.sibling[k] = 1;
            }
        }
    }
    return seq;
}

} // namespace hyperlat
