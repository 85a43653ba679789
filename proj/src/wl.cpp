#include "hyperlat/wl.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

namespace hyperlat {

namespace {

// First-appearance canonical dictionary over serialized signatures.
class Canon {
public:
    int id_of(const std::string& sig) {
        auto [it, inserted] = ids_.emplace(sig, static_cast<int>(ids_.size()));
        (void)inserted;
        return it->second;
    }

private:
    std::unordered_map<std::string, int> ids_;
};

void append_int(std::string& s, int v) {
    s.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::string signature(char tag, int own, std::vector<int> neighbors) {
    std::sort(neighbors.begin(), neighbors.end());
    std::string s(1, tag);
    append_int(s, own);
    for (int c : neighbors) append_int(s, c);
    return s;
}

// Initial vertex colors: canonical ids of the raw feature rows (byte-exact),
// or a single shared color when the hypergraph carries no features.
std::vector<int> initial_vertex_colors(const Hypergraph& h, Canon& canon) {
    std::vector<int> colors(h.num_vertices(), 0);
    for (VertexId v = 0; v < h.num_vertices(); ++v) {
        std::string sig(1, 'x');
        if (h.feature_dim() > 0) {
            auto row = h.feature_row(v);
            sig.append(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
        }
        colors[v] = canon.id_of(sig);
    }
    return colors;
}

size_t count_classes(const std::vector<int>& colors) {
    std::set<int> s(colors.begin(), colors.end());
    return s.size();
}

struct RefineStep {
    std::vector<int> vertex_colors;
    std::vector<int> edge_colors;
};

RefineStep refine_once(const Hypergraph& h, const RefineStep& prev, Canon& canon) {
    RefineStep next;
    next.vertex_colors.resize(h.num_vertices());
    next.edge_colors.resize(h.num_edges());
    for (VertexId v = 0; v < h.num_vertices(); ++v) {
        std::vector<int> inc;
        for (EdgeId e : h.incident(v)) inc.push_back(prev.edge_colors[e]);
        next.vertex_colors[v] = canon.id_of(signature('v', prev.vertex_colors[v], std::move(inc)));
    }
    for (EdgeId e = 0; e < h.num_edges(); ++e) {
        std::vector<int> mem;
        for (VertexId v : h.edge(e).members()) mem.push_back(prev.vertex_colors[v]);
        next.edge_colors[e] = canon.id_of(signature('e', prev.edge_colors[e], std::move(mem)));
    }
    return next;
}

std::vector<std::vector<int>> incident_edge_color_multisets(const Hypergraph& h,
                                                            const std::vector<int>& edge_colors) {
    std::vector<std::vector<int>> out(h.num_vertices());
    for (VertexId v = 0; v < h.num_vertices(); ++v) {
        for (EdgeId e : h.incident(v)) out[v].push_back(edge_colors[e]);
        std::sort(out[v].begin(), out[v].end());
    }
    return out;
}

} // namespace

size_t ColoringState::num_vertex_classes() const { return count_classes(vertex_colors); }
size_t ColoringState::num_edge_classes() const { return count_classes(edge_colors); }

ColoringState wl_refine(const Hypergraph& h, size_t max_iters) {
    if (max_iters < 1) throw InputError("wl_refine: max_iters must be >= 1");
    Canon canon;
    RefineStep cur{initial_vertex_colors(h, canon), std::vector<int>(h.num_edges(), 0)};

    size_t prev_vc = count_classes(cur.vertex_colors);
    size_t prev_ec = h.num_edges() == 0 ? 0 : 1;
    ColoringState state;
    for (size_t t = 1; t <= max_iters; ++t) {
        cur = refine_once(h, cur, canon);
        const size_t vc = count_classes(cur.vertex_colors);
        const size_t ec = count_classes(cur.edge_colors);
        state.iterations_run = t;
        // Own color enters every signature, so classes only ever split; the
        // partition is stable once the class counts stop growing.
        if (t >= 2 && vc == prev_vc && ec == prev_ec) {
            state.stable = true;
            state.stable_iteration = t;
            break;
        }
        prev_vc = vc;
        prev_ec = ec;
    }
    state.vertex_colors = std::move(cur.vertex_colors);
    state.edge_colors = std::move(cur.edge_colors);
    return state;
}

bool wl_equivalent(const Hypergraph& h1, const Hypergraph& h2) {
    if (h1.num_vertices() != h2.num_vertices())
        throw InputError("wl_equivalent: vertex counts differ");

    Canon canon;
    RefineStep a{initial_vertex_colors(h1, canon), std::vector<int>(h1.num_edges(), 0)};
    RefineStep b{initial_vertex_colors(h2, canon), std::vector<int>(h2.num_edges(), 0)};

    auto matches = [&](const RefineStep& x, const RefineStep& y) {
        if (x.vertex_colors != y.vertex_colors) return false;
        return incident_edge_color_multisets(h1, x.edge_colors) ==
               incident_edge_color_multisets(h2, y.edge_colors);
    };
    if (!matches(a, b)) return false;

    size_t prev_a_vc = count_classes(a.vertex_colors), prev_a_ec = h1.num_edges() ? 1 : 0;
    size_t prev_b_vc = count_classes(b.vertex_colors), prev_b_ec = h2.num_edges() ? 1 : 0;
    const size_t max_iters = 2 * (h1.num_vertices() + h1.num_edges() + h2.num_edges()) + 4;
    for (size_t t = 1; t <= max_iters; ++t) {
        a = refine_once(h1, a, canon);
        b = refine_once(h2, b, canon);
        if (!matches(a, b)) return false;
        const size_t avc = count_classes(a.vertex_colors), aec = count_classes(a.edge_colors);
        const size_t bvc = count_classes(b.vertex_colors), bec = count_classes(b.edge_colors);
        if (t >= 2 && avc == prev_a_vc && aec == prev_a_ec && bvc == prev_b_vc && bec == prev_b_ec)
            return true; // joint stabilization with all checks passed
        prev_a_vc = avc; prev_a_ec = aec;
        prev_b_vc = bvc; prev_b_ec = bec;
    }
    return true; // unreachable: refinement must stabilize within the bound
}

std::optional<std::vector<VertexId>> brute_force_isomorphic(const Hypergraph& h1,
                                                            const Hypergraph& h2) {
    if (h1.num_vertices() != h2.num_vertices())
        throw InputError("brute_force_isomorphic: vertex counts differ");
    if (h1.num_vertices() > 10)
        throw ResourceError("brute_force_isomorphic: guarded at 10 vertices");
    if (h1.num_edges() != h2.num_edges()) return std::nullopt;

    const size_t n = h1.num_vertices();
    std::vector<VertexId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    auto feature_compatible = [&](const std::vector<VertexId>& p) {
        if (h1.feature_dim() != h2.feature_dim()) return false;
        for (VertexId v = 0; v < n; ++v) {
            if (h1.feature_dim() == 0) break;
            auto r1 = h1.feature_row(v);
            auto r2 = h2.feature_row(p[v]);
            if (!std::equal(r1.begin(), r1.end(), r2.begin())) return false;
        }
        return true;
    };

    do {
        if (!feature_compatible(perm)) continue;
        bool ok = true;
        for (const auto& e : h1.hyperedges()) {
            std::vector<VertexId> mapped;
            mapped.reserve(e.size());
            for (VertexId v : e.members()) mapped.push_back(perm[v]);
            if (!h2.has_edge(VertexSubset(std::move(mapped)))) { ok = false; break; }
        }
        if (ok) return perm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

std::vector<size_t> pair_intersection_multiset(const Hypergraph& h) {
    std::vector<size_t> out;
    const auto& es = h.hyperedges();
    for (size_t i = 0; i < es.size(); ++i)
        for (size_t j = i + 1; j < es.size(); ++j)
            out.push_back(es[i].intersection_size(es[j]));
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

MpEncoding mp_encode_canonical(const Hypergraph& h, size_t depth) {
    Canon canon;
    std::vector<int> vc = initial_vertex_colors(h, canon);
    std::vector<int> ec(h.num_edges(), 0);
    for (size_t t = 0; t < depth; ++t) {
        std::vector<int> msg(h.num_edges());
        for (EdgeId e = 0; e < h.num_edges(); ++e) {
            std::vector<int> mem;
            for (VertexId v : h.edge(e).members()) mem.push_back(vc[v]);
            msg[e] = canon.id_of(signature('m', ec[e], std::move(mem)));
        }
        std::vector<int> vc_next(h.num_vertices());
        for (VertexId v = 0; v < h.num_vertices(); ++v) {
            std::vector<int> inc;
            for (EdgeId e : h.incident(v)) inc.push_back(msg[e]);
            vc_next[v] = canon.id_of(signature('v', vc[v], std::move(inc)));
        }
        for (EdgeId e = 0; e < h.num_edges(); ++e) {
            std::vector<int> mem;
            for (VertexId v : h.edge(e).members()) mem.push_back(vc_next[v]);
            ec[e] = canon.id_of(signature('e', msg[e], std::move(mem)));
        }
        vc = std::move(vc_next);
    }

    // One-hot lift over densely remapped final states (first appearance in
    // index order), separately for vertices and edges.
    auto one_hot_lift = [](const std::vector<int>& states) {
        std::map<int, int> dense;
        for (int s : states) dense.emplace(s, static_cast<int>(dense.size()));
        std::vector<std::vector<double>> out(states.size(),
                                             std::vector<double>(std::max<size_t>(dense.size(), 1), 0.0));
        for (size_t i = 0; i < states.size(); ++i) out[i][dense.at(states[i])] = 1.0;
        return out;
    };

    MpEncoding enc;
    enc.vertex_features = one_hot_lift(vc);
    enc.edge_features = one_hot_lift(ec);
    std::sort(enc.edge_features.begin(), enc.edge_features.end());
    return enc;
}

MpEncoding mp_encode_mean_field(const Hypergraph& h, size_t depth) {
    const size_t d = std::max<size_t>(h.feature_dim(), 1);
    std::vector<std::vector<double>> hv(h.num_vertices(), std::vector<double>(d, 0.0));
    if (h.feature_dim() > 0)
        for (VertexId v = 0; v < h.num_vertices(); ++v) {
            auto row = h.feature_row(v);
            std::copy(row.begin(), row.end(), hv[v].begin());
        }
    std::vector<std::vector<double>> he(h.num_edges(), std::vector<double>(d, 0.0));

    auto mean_of = [&](const std::vector<std::vector<double>>& pool, auto&& indices) {
        std::vector<double> m(d, 0.0);
        size_t count = 0;
        for (auto idx : indices) {
            for (size_t i = 0; i < d; ++i) m[i] += pool[idx][i];
            ++count;
        }
        if (count) for (double& x : m) x /= static_cast<double>(count);
        return m;
    };

    for (size_t t = 0; t < depth; ++t) {
        std::vector<std::vector<double>> msg(h.num_edges(), std::vector<double>(d, 0.0));
        for (EdgeId e = 0; e < h.num_edges(); ++e) {
            auto m = mean_of(hv, h.edge(e).members());
            for (size_t i = 0; i < d; ++i) msg[e][i] = 0.5 * (he[e][i] + m[i]);
        }
        std::vector<std::vector<double>> hv_next = hv;
        for (VertexId v = 0; v < h.num_vertices(); ++v) {
            if (h.degree(v) == 0) continue;
            auto m = mean_of(msg, h.incident(v));
            for (size_t i = 0; i < d; ++i) hv_next[v][i] = 0.5 * (hv[v][i] + m[i]);
        }
        for (EdgeId e = 0; e < h.num_edges(); ++e) {
            auto m = mean_of(hv_next, h.edge(e).members());
            for (size_t i = 0; i < d; ++i) he[e][i] = 0.5 * (msg[e][i] + m[i]);
        }
        hv = std::move(hv_next);
    }

    MpEncoding enc;
    enc.vertex_features = std::move(hv);
    enc.edge_features = std::move(he);
    std::sort(enc.edge_features.begin(), enc.edge_features.end());
    return enc;
}

} // namespace

MpEncoding mp_encode(const Hypergraph& h, const MpEncoderConfig& cfg) {
    if (cfg.depth == 0) {
        MpEncoding enc;
        enc.vertex_features.resize(h.num_vertices());
        for (VertexId v = 0; v < h.num_vertices(); ++v)
            if (h.feature_dim() > 0) {
                auto row = h.feature_row(v);
                enc.vertex_features[v].assign(row.begin(), row.end());
            } else {
                enc.vertex_features[v] = {0.0};
            }
        enc.edge_features.assign(h.num_edges(), {0.0}); // fixed initialization token
        return enc;
    }
    return cfg.mode == MpEncoderConfig::Mode::Canonical ? mp_encode_canonical(h, cfg.depth)
                                                        : mp_encode_mean_field(h, cfg.depth);
}

std::pair<Hypergraph, Hypergraph> witness_hypergraphs(WitnessPair which) {
    const std::vector<std::vector<double>> constant_features(6, std::vector<double>(4, 0.5));
    auto make = [&](std::vector<VertexSubset> edges) {
        return Hypergraph(6, std::move(edges), constant_features);
    };

    if (which == WitnessPair::MP_BLIND) {
        Hypergraph a = make({{0, 1, 2}, {3, 4, 5}});
        Hypergraph b = make({{0, 1, 3}, {2, 4, 5}});
        for (const Hypergraph* g : {&a, &b})
            for (VertexId v = 0; v < 6; ++v)
                if (g->degree(v) != 1)
                    throw std::logic_error("witness MP_BLIND: expected every vertex degree 1");
        return {std::move(a), std::move(b)};
    }

    Hypergraph a = make({{0, 1, 2}, {0, 1, 3}, {2, 4, 5}, {3, 4, 5}});
    Hypergraph b = make({{0, 1, 2}, {0, 3, 4}, {1, 3, 5}, {2, 4, 5}});
    for (const Hypergraph* g : {&a, &b}) {
        for (const auto& e : g->hyperedges())
            if (e.size() != 3) throw std::logic_error("witness HGPM_SEP: expected 3-uniform edges");
        for (VertexId v = 0; v < 6; ++v)
            if (g->degree(v) != 2)
                throw std::logic_error("witness HGPM_SEP: expected every vertex degree 2");
    }
    if (pair_intersection_multiset(a) != std::vector<size_t>{0, 0, 1, 1, 2, 2} ||
        pair_intersection_multiset(b) != std::vector<size_t>{1, 1, 1, 1, 1, 1})
        throw std::logic_error("witness HGPM_SEP: pair-intersection multisets are off");
    return {std::move(a), std::move(b)};
}

} // namespace hyperlat
