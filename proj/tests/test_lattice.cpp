#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hyperlat/lattice.hpp"
#include "oracle.hpp"

using namespace hyperlat;

namespace {

Hypergraph make(size_t n, std::vector<VertexSubset> edges) {
    return Hypergraph(n, std::move(edges));
}

// The blind-pair edge sets, 0-based.
Hypergraph pair_a() { return make(6, {{0, 1, 2}, {3, 4, 5}}); }
Hypergraph pair_b() { return make(6, {{0, 1, 3}, {2, 4, 5}}); }

// ℰ = {{a},{a,b}} over three vertices: the möbius-cancellation instance.
Hypergraph cancellation() { return make(3, {{0}, {0, 1}}); }

} // namespace

TEST_CASE("indicator: membership, non-membership, empty convention") {
    Hypergraph h = make(4, {{1, 2, 3}});
    CHECK(indicator(h, {1, 2, 3}) == 1);
    CHECK(indicator(h, {1, 2}) == 0);
    CHECK(indicator(h, {}) == 0);
    CHECK_THROWS_AS(indicator(h, {1, 9}), InputError);
}

TEST_CASE("comp_label: the three regimes and the absent case") {
    CHECK(comp_label(pair_a(), {0, 1}, {0, 1, 2}) == CompLabel::EMER);
    Hypergraph both = make(4, {{1, 2}, {1, 2, 3}});
    CHECK(comp_label(both, {1, 2}, {1, 2, 3}) == CompLabel::COMP);
    CHECK_FALSE(comp_label(pair_b(), {0, 1}, {0, 1, 2}).has_value());
    CHECK_THROWS_AS(comp_label(pair_a(), {0}, {0, 1, 2}), InputError); // not adjacent
    CHECK_THROWS_AS(comp_label(pair_a(), {0, 3}, {0, 1, 2}), InputError); // not nested
}

TEST_CASE("coboundary matches the label bijection") {
    Hypergraph h = pair_a();
    CHECK(coboundary(h, {0, 1}, {0, 1, 2}) == 1); // EMER
    Hypergraph both = make(4, {{1, 2}, {1, 2, 3}});
    CHECK(coboundary(both, {1, 2}, {1, 2, 3}) == 0);
    CHECK(indicator(both, {1, 2}) == 1); // COMP: zero difference with observed bottom
    CHECK(coboundary(pair_b(), {0, 1}, {0, 1, 2}) == 0);
    CHECK(indicator(pair_b(), {0, 1}) == 0); // both-absent: zero with unobserved bottom
}

TEST_CASE("comp_structure: contents and deterministic ordering") {
    auto c = comp_structure(pair_a(), 3);
    CHECK(c.label_of({0, 1}, {0, 1, 2}) == CompLabel::EMER);
    CHECK_FALSE(c.label_of({0, 1}, {0, 1, 3}).has_value());

    auto empty = comp_structure(make(4, {}), 3);
    CHECK(empty.covers.empty());

    // The cancellation instance carries both inhibitory covers.
    auto cc = comp_structure(cancellation(), 3);
    CHECK(cc.label_of({0}, {0, 2}) == CompLabel::INHIB);
    CHECK(cc.label_of({0, 1}, {0, 1, 2}) == CompLabel::INHIB);
    CHECK(cc.label_of({}, {0}) == CompLabel::EMER);
    CHECK(cc.label_of({1}, {0, 1}) == CompLabel::EMER);

    for (size_t i = 0; i + 1 < cc.covers.size(); ++i) {
        const auto& a = cc.covers[i];
        const auto& b = cc.covers[i + 1];
        CHECK((a.sub < b.sub || (a.sub == b.sub && a.super < b.super)));
    }

    CHECK_THROWS_AS(comp_structure(pair_a(), 7), InputError); // beyond vertex count
}

TEST_CASE("comp_structure: candidate cap guards huge universes") {
    std::vector<VertexSubset> one_edge = {{0}};
    Hypergraph h(1'200'000, std::move(one_edge));
    CHECK_THROWS_AS(comp_structure(h, 2), ResourceError);
}

TEST_CASE("recover_indicator: chains, anchor, and order guard") {
    auto c = comp_structure(pair_a(), 3);
    CHECK(recover_indicator(c, 6, {3, 4, 5}, true) == 1);
    CHECK(recover_indicator(c, 6, {3, 4, 5}, false) == 1);
    CHECK(recover_indicator(c, 6, {}) == 0);
    auto cc = comp_structure(cancellation(), 3);
    CHECK(recover_indicator(cc, 3, {0, 1, 2}) == 0);

    auto shallow = comp_structure(pair_a(), 2);
    CHECK_THROWS_AS(recover_indicator(shallow, 6, {0, 1, 2}), InputError);
}

TEST_CASE("is_simplicial: closure scan and EMER scan agree") {
    // All non-empty subsets of a triangle: downward closed.
    Hypergraph full = make(3, {{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}});
    CHECK(is_simplicial_direct(full));
    CHECK(is_simplicial_emer_scan(full));

    Hypergraph faces_missing = make(3, {{0, 1, 2}});
    CHECK_FALSE(is_simplicial_direct(faces_missing));
    CHECK_FALSE(is_simplicial_emer_scan(faces_missing));

    // {{a},{a,b}} is NOT downward closed ({b} is missing) and its structure
    // carries the non-empty-bottom EMER ({b},{a,b}); both routes agree.
    CHECK_FALSE(is_simplicial_direct(cancellation()));
    CHECK_FALSE(is_simplicial_emer_scan(cancellation()));

    // The closed variant: EMER covers appear only at the empty bottom.
    Hypergraph closed = make(3, {{0}, {1}, {0, 1}});
    CHECK(is_simplicial_direct(closed));
    CHECK(is_simplicial_emer_scan(closed));
    auto c = comp_structure(closed, 3);
    for (const auto& cover : c.covers)
        if (cover.label == CompLabel::EMER) CHECK(cover.sub.empty());
}

TEST_CASE("mobius: cancellation instance and basics") {
    CHECK(mobius(cancellation(), {0, 1, 2}) == 0);
    CHECK(mobius(cancellation(), {0, 1}) == 0); // 1 − 1 − 0 + 0
    Hypergraph single = make(2, {{0}});
    CHECK(mobius(single, {0}) == 1);
}

TEST_CASE("property: coboundary bijection on random hypergraphs") {
    Rng rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        const size_t n = 3 + rng.below(6); // up to 8
        auto mh = oracle::random_mask_hypergraph(n, rng);
        Hypergraph h = oracle::to_hypergraph(mh);
        for (uint64_t sub = 0; sub < (uint64_t{1} << n); ++sub) {
            for (size_t b = 0; b < n; ++b) {
                if (sub & (uint64_t{1} << b)) continue;
                const uint64_t super = sub | (uint64_t{1} << b);
                VertexSubset s = VertexSubset::from_mask(sub);
                VertexSubset sp = VertexSubset::from_mask(super);
                const int delta = coboundary(h, s, sp);
                const int lo = indicator(h, s);
                const int hi = indicator(h, sp);
                CHECK(delta == mh.coboundary(sub, super));
                // (δ, 1_S) determines (1_S, 1_S') and the label, bijectively.
                CHECK(hi == lo + delta);
                auto label = comp_label(h, s, sp);
                if (delta == 1) CHECK(label == CompLabel::EMER);
                if (delta == -1) CHECK(label == CompLabel::INHIB);
                if (delta == 0 && lo == 1) CHECK(label == CompLabel::COMP);
                if (delta == 0 && lo == 0) CHECK_FALSE(label.has_value());
            }
        }
    }
}

TEST_CASE("property: chain recovery reproduces the indicator, both chains") {
    Rng rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t n = 4 + rng.below(5); // up to 8
        auto mh = oracle::random_mask_hypergraph(n, rng);
        Hypergraph h = oracle::to_hypergraph(mh);
        const size_t max_order = 4;
        auto c = comp_structure(h, max_order);
        for (uint64_t s = 0; s < (uint64_t{1} << n); ++s) {
            if (static_cast<size_t>(__builtin_popcountll(s)) > max_order) continue;
            VertexSubset vs = VertexSubset::from_mask(s);
            const int up = recover_indicator(c, n, vs, true);
            const int down = recover_indicator(c, n, vs, false);
            CHECK(up == mh.indicator(s));
            CHECK(up == down);
        }
    }
}

TEST_CASE("property: simplicial stratum equivalence on random instances") {
    Rng rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        auto mh = oracle::random_mask_hypergraph(4, rng, 0.35, 4);
        Hypergraph h = oracle::to_hypergraph(mh);
        CHECK(is_simplicial_direct(h) == mh.downward_closed());
        CHECK(is_simplicial_emer_scan(h) == mh.downward_closed());
    }
}

TEST_CASE("property: möbius inversion identity") {
    Rng rng(404);
    for (int trial = 0; trial < 30; ++trial) {
        const size_t n = 3 + rng.below(5);
        auto mh = oracle::random_mask_hypergraph(n, rng);
        Hypergraph h = oracle::to_hypergraph(mh);
        for (uint64_t s = 0; s < (uint64_t{1} << n); ++s) {
            VertexSubset vs = VertexSubset::from_mask(s);
            CHECK(mobius(h, vs) == mh.mobius(s));
            // Σ_{T⊆S} g(T) = 1_S
            long long total = 0;
            uint64_t t = s;
            while (true) {
                total += mobius(h, VertexSubset::from_mask(t));
                if (t == 0) break;
                t = (t - 1) & s;
            }
            CHECK(total == indicator(h, vs));
        }
    }
}

TEST_CASE("cancellation caveat: zero coefficient with live EMER and INHIB covers") {
    Hypergraph h = cancellation();
    CHECK(mobius(h, {0, 1, 2}) == 0);
    auto c = comp_structure(h, 3);
    size_t emer = 0, inhib = 0;
    for (const auto& cover : c.covers) {
        if (cover.label == CompLabel::EMER) ++emer;
        if (cover.label == CompLabel::INHIB) ++inhib;
    }
    CHECK(emer == 2);
    CHECK(inhib == 2);
}

TEST_CASE("hypergraph invariants: construction rejects bad input") {
    CHECK_THROWS_AS(make(3, {{}}), InputError);
    CHECK_THROWS_AS(make(3, {{0, 1}, {0, 1}}), InputError);
    CHECK_THROWS_AS(make(2, {{0, 5}}), InputError);
    CHECK(make(3, {{0, 1}}).check_membership_index());
}
