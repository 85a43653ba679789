#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace hyperlat {

using VertexId = uint32_t;

// Canonical vertex subset: ids kept strictly increasing, so equal subsets are
// representation-identical. The empty subset is representable. For universes
// of at most 64 vertices the hot lattice loops work on the packed mask;
// the sorted id vector is the general representation.
class VertexSubset {
public:
    VertexSubset() = default;
    VertexSubset(std::initializer_list<VertexId> ids);
    explicit VertexSubset(std::vector<VertexId> ids); // sorted + deduped on entry

    static VertexSubset from_mask(uint64_t mask);

    const std::vector<VertexId>& members() const { return ids_; }
    size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    bool contains(VertexId v) const;
    bool is_subset_of(const VertexSubset& other) const;
    // True iff this ⊂ other with |other| = |this| + 1.
    bool is_covered_by(const VertexSubset& other) const;

    VertexSubset with(VertexId v) const;
    VertexSubset without(VertexId v) const;
    size_t intersection_size(const VertexSubset& other) const;
    size_t union_size(const VertexSubset& other) const;

    // Requires all ids < 64.
    uint64_t to_mask() const;
    VertexId max_id() const; // requires non-empty

    // Total order by (|S|, lexicographic members): the canonical iteration
    // order used for structures and linearization.
    std::strong_ordering operator<=>(const VertexSubset& other) const;
    bool operator==(const VertexSubset& other) const = default;

    std::string to_string() const; // "{0,2,5}"

private:
    std::vector<VertexId> ids_;
};

struct SubsetHash {
    size_t operator()(const VertexSubset& s) const {
        size_t h = 0xcbf29ce484222325ull;
        for (VertexId v : s.members()) {
            h ^= v + 0x9e3779b9ull;
            h *= 0x100000001b3ull;
        }
        return h;
    }
};

} // namespace hyperlat
