#include "hyperlat/lattice.hpp"

#include <algorithm>
#include <bit>

namespace hyperlat {

namespace {

constexpr size_t kPairCap = size_t{1} << 20;

void require_cover_shape(const Hypergraph& h, const VertexSubset& sub, const VertexSubset& super) {
    if (!super.empty() && super.max_id() >= h.num_vertices())
        throw InputError("cover: vertex id out of range in " + super.to_string());
    if (!sub.is_covered_by(super))
        throw InputError("cover: expected S ⊂ S' with |S'| = |S|+1, got " + sub.to_string() +
                         " and " + super.to_string());
}

std::optional<CompLabel> label_from_indicators(int lo, int hi) {
    if (lo == 1 && hi == 1) return CompLabel::COMP;
    if (lo == 0 && hi == 1) return CompLabel::EMER;
    if (lo == 1 && hi == 0) return CompLabel::INHIB;
    return std::nullopt;
}

} // namespace

const char* to_string(CompLabel label) {
    switch (label) {
        case CompLabel::COMP: return "COMP";
        case CompLabel::EMER: return "EMER";
        case CompLabel::INHIB: return "INHIB";
    }
    return "?";
}

std::optional<CompLabel> CompStructure::label_of(const VertexSubset& sub,
                                                 const VertexSubset& super) const {
    auto it = std::lower_bound(covers.begin(), covers.end(), sub,
                               [](const LabeledCover& c, const VertexSubset& s) { return c.sub < s; });
    for (; it != covers.end() && it->sub == sub; ++it)
        if (it->super == super) return it->label;
    return std::nullopt;
}

bool CompStructure::contains_emer_above_empty() const {
    for (const auto& c : covers)
        if (c.label == CompLabel::EMER && !c.sub.empty()) return true;
    return false;
}

int indicator(const Hypergraph& h, const VertexSubset& s) {
    if (!s.empty() && s.max_id() >= h.num_vertices())
        throw InputError("indicator: vertex id out of range in " + s.to_string());
    if (s.empty()) return 0;
    return h.has_edge(s) ? 1 : 0;
}

std::optional<CompLabel> comp_label(const Hypergraph& h, const VertexSubset& sub,
                                    const VertexSubset& super) {
    require_cover_shape(h, sub, super);
    return label_from_indicators(indicator(h, sub), indicator(h, super));
}

int coboundary(const Hypergraph& h, const VertexSubset& sub, const VertexSubset& super) {
    require_cover_shape(h, sub, super);
    return indicator(h, super) - indicator(h, sub);
}

CompStructure comp_structure(const Hypergraph& h, size_t max_order) {
    if (max_order > h.num_vertices())
        throw InputError("comp_structure: max_order exceeds the vertex count");

    // An informative cover has an observed endpoint, so the observed edges
    // generate every candidate: covers below an edge (drop one member) and
    // covers above an edge (add one vertex). Both-absent pairs never enter.
    size_t candidates = 0;
    for (const auto& e : h.hyperedges()) {
        if (e.size() > max_order) continue;
        candidates += e.size() + (h.num_vertices() - e.size());
        if (candidates > kPairCap)
            throw ResourceError("comp_structure: candidate covers exceed the 2^20 cap");
    }

    std::vector<LabeledCover> covers;
    covers.reserve(candidates);
    for (const auto& e : h.hyperedges()) {
        if (e.size() <= max_order) {
            // e as the observed bottom: (e, e ∪ {u}). COMP if the super is
            // observed too; INHIB otherwise.
            for (VertexId u = 0; u < h.num_vertices(); ++u) {
                if (e.contains(u)) continue;
                VertexSubset super = e.with(u);
                if (super.size() > max_order) continue;
                covers.push_back({e, super,
                                  h.has_edge(super) ? CompLabel::COMP : CompLabel::INHIB});
            }
        }
        if (e.size() <= max_order) {
            // e as the observed top over an unobserved bottom: EMER. Observed
            // bottoms are already emitted above as COMP; skipping them here
            // keeps each cover emitted exactly once.
            for (VertexId v : e.members()) {
                VertexSubset sub = e.without(v);
                if (indicator(h, sub) == 0) covers.push_back({sub, e, CompLabel::EMER});
            }
        }
    }
    std::sort(covers.begin(), covers.end(), [](const LabeledCover& a, const LabeledCover& b) {
        if (a.sub != b.sub) return a.sub < b.sub;
        return a.super < b.super;
    });
    return CompStructure{std::move(covers), max_order};
}

int recover_indicator(const CompStructure& c, size_t num_vertices, const VertexSubset& s,
                      bool ascending) {
    if (s.size() > c.max_order)
        throw InputError("recover_indicator: |s| exceeds the structure's max_order");
    if (!s.empty() && s.max_id() >= num_vertices)
        throw InputError("recover_indicator: vertex id out of range");

    std::vector<VertexId> order(s.members());
    if (!ascending) std::reverse(order.begin(), order.end());

    // Telescope δ along the saturated chain ∅ ⊂ ... ⊂ s. A labeled cover
    // contributes its δ value; an unlabeled cover is both-absent, δ = 0.
    int value = 0; // 1_∅
    VertexSubset cur;
    for (VertexId v : order) {
        VertexSubset next = cur.with(v);
        if (auto label = c.label_of(cur, next)) {
            switch (*label) {
                case CompLabel::EMER: value += 1; break;
                case CompLabel::INHIB: value -= 1; break;
                case CompLabel::COMP: break;
            }
        }
        cur = next;
    }
    return value;
}

bool is_simplicial_direct(const Hypergraph& h) {
    size_t work = 0;
    for (const auto& e : h.hyperedges()) {
        if (e.size() > 20) throw ResourceError("is_simplicial: hyperedge larger than 20 vertices");
        work += size_t{1} << e.size();
        if (work > kPairCap) throw ResourceError("is_simplicial: subset scan exceeds the 2^20 cap");
        const auto& m = e.members();
        const uint64_t full = (uint64_t{1} << e.size()) - 1;
        for (uint64_t pick = 1; pick < full; ++pick) {
            std::vector<VertexId> ids;
            for (size_t i = 0; i < m.size(); ++i)
                if (pick & (uint64_t{1} << i)) ids.push_back(m[i]);
            if (!h.has_edge(VertexSubset(std::move(ids)))) return false;
        }
    }
    return true;
}

bool is_simplicial_emer_scan(const Hypergraph& h) {
    if (h.num_vertices() > 20)
        throw ResourceError("is_simplicial_emer_scan: guarded at 20 vertices");
    size_t max_order = 0;
    for (const auto& e : h.hyperedges()) max_order = std::max(max_order, e.size());
    return !comp_structure(h, max_order).contains_emer_above_empty();
}

long long mobius(const Hypergraph& h, const VertexSubset& s) {
    if (s.size() > 20) throw ResourceError("mobius: guarded at |s| <= 20");
    if (!s.empty() && s.max_id() >= h.num_vertices())
        throw InputError("mobius: vertex id out of range");
    const auto& m = s.members();
    long long g = 0;
    for (uint64_t pick = 0; pick < (uint64_t{1} << m.size()); ++pick) {
        std::vector<VertexId> ids;
        for (size_t i = 0; i < m.size(); ++i)
            if (pick & (uint64_t{1} << i)) ids.push_back(m[i]);
        VertexSubset t(std::move(ids));
        const int sign = ((s.size() - t.size()) % 2 == 0) ? 1 : -1;
        g += sign * indicator(h, t);
    }
    return g;
}

} // namespace hyperlat
