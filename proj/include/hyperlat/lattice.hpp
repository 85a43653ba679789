#pragma once

#include <optional>
#include <vector>

#include "hyperlat/hypergraph.hpp"

namespace hyperlat {

// Regime of an adjacent-order subset pair (S, S'), |S'| = |S| + 1, read off
// the observation indicators: COMP (1,1), EMER (0,1), INHIB (1,0). The
// both-absent case carries no label and is represented by an empty optional.
enum class CompLabel : uint8_t { COMP, EMER, INHIB };

const char* to_string(CompLabel label);

struct LabeledCover {
    VertexSubset sub;
    VertexSubset super;
    CompLabel label;

    bool operator==(const LabeledCover&) const = default;
};

// All informative covers of a hypergraph, in ascending (|S|, S, S') order.
// Covers with empty bottom are included: (∅, {v}) is EMER whenever {v} is
// observed, which anchors chain recovery at the 1_∅ = 0 convention.
struct CompStructure {
    std::vector<LabeledCover> covers;
    size_t max_order = 0;

    std::optional<CompLabel> label_of(const VertexSubset& sub, const VertexSubset& super) const;
    bool contains_emer_above_empty() const; // any EMER with |S| >= 1
};

// Observation indicator 1_S. 1_∅ = 0 always.
int indicator(const Hypergraph& h, const VertexSubset& s);

// Composition label of an adjacent-order nested pair; empty when both absent.
// A pair that is not adjacent-order nested is an input error.
std::optional<CompLabel> comp_label(const Hypergraph& h, const VertexSubset& sub,
                                    const VertexSubset& super);

// Forward difference of the indicator along a cover: 1_S' − 1_S ∈ {−1,0,+1}.
int coboundary(const Hypergraph& h, const VertexSubset& sub, const VertexSubset& super);

// Every informative cover with |S'| ≤ max_order. Enumeration is driven by the
// observed edges (an informative pair has an observed endpoint), with a hard
// cap of 2^20 candidate pairs per call.
CompStructure comp_structure(const Hypergraph& h, size_t max_order);

// Recovers 1_S from a structure alone by telescoping the coboundary along a
// saturated chain from ∅. Requires |s| ≤ structure.max_order. Two chain
// orders are available so path-independence can be checked: `ascending`
// inserts members smallest-first, otherwise largest-first.
int recover_indicator(const CompStructure& c, size_t num_vertices, const VertexSubset& s,
                      bool ascending = true);

// Downward closure among non-empty subsets, by direct subset scan.
bool is_simplicial_direct(const Hypergraph& h);
// The same predicate via the structure: no EMER cover with non-empty bottom.
bool is_simplicial_emer_scan(const Hypergraph& h);
inline bool is_simplicial(const Hypergraph& h) { return is_simplicial_direct(h); }

// Möbius coefficient g(S) = Σ_{T⊆S} (−1)^{|S|−|T|} 1_T. Guarded at |s| ≤ 20.
long long mobius(const Hypergraph& h, const VertexSubset& s);

} // namespace hyperlat
