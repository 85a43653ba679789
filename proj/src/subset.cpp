#include "hyperlat/subset.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace hyperlat {

VertexSubset::VertexSubset(std::initializer_list<VertexId> ids)
    : VertexSubset(std::vector<VertexId>(ids)) {}

VertexSubset::VertexSubset(std::vector<VertexId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

VertexSubset VertexSubset::from_mask(uint64_t mask) {
    VertexSubset s;
    while (mask) {
        const int bit = std::countr_zero(mask);
        s.ids_.push_back(static_cast<VertexId>(bit));
        mask &= mask - 1;
    }
    return s;
}

bool VertexSubset::contains(VertexId v) const {
    return std::binary_search(ids_.begin(), ids_.end(), v);
}

bool VertexSubset::is_subset_of(const VertexSubset& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
}

bool VertexSubset::is_covered_by(const VertexSubset& other) const {
    return other.size() == size() + 1 && is_subset_of(other);
}

VertexSubset VertexSubset::with(VertexId v) const {
    VertexSubset s(*this);
    auto it = std::lower_bound(s.ids_.begin(), s.ids_.end(), v);
    if (it == s.ids_.end() || *it != v) s.ids_.insert(it, v);
    return s;
}

VertexSubset VertexSubset::without(VertexId v) const {
    VertexSubset s(*this);
    auto it = std::lower_bound(s.ids_.begin(), s.ids_.end(), v);
    if (it != s.ids_.end() && *it == v) s.ids_.erase(it);
    return s;
}

size_t VertexSubset::intersection_size(const VertexSubset& other) const {
    size_t n = 0, i = 0, j = 0;
    while (i < ids_.size() && j < other.ids_.size()) {
        if (ids_[i] == other.ids_[j]) { ++n; ++i; ++j; }
        else if (ids_[i] < other.ids_[j]) ++i;
        else ++j;
    }
    return n;
}

size_t VertexSubset::union_size(const VertexSubset& other) const {
    return size() + other.size() - intersection_size(other);
}

uint64_t VertexSubset::to_mask() const {
    uint64_t m = 0;
    for (VertexId v : ids_) {
        if (v >= 64) throw std::invalid_argument("VertexSubset::to_mask: vertex id >= 64");
        m |= (uint64_t{1} << v);
    }
    return m;
}

VertexId VertexSubset::max_id() const { return ids_.back(); }

std::strong_ordering VertexSubset::operator<=>(const VertexSubset& other) const {
    if (auto c = ids_.size() <=> other.ids_.size(); c != 0) return c;
    for (size_t i = 0; i < ids_.size(); ++i)
        if (auto c = ids_[i] <=> other.ids_[i]; c != 0) return c;
    return std::strong_ordering::equal;
}

std::string VertexSubset::to_string() const {
    std::string out = "{";
    for (size_t i = 0; i < ids_.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(ids_[i]);
    }
    out += "}";
    return out;
}

} // namespace hyperlat
