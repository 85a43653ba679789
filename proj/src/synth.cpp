#include "hyperlat/synth.hpp"

#include <algorithm>
#include <set>

#include "hyperlat/rng.hpp"

namespace hyperlat {

namespace {

VertexSubset draw_subset(const std::vector<VertexId>& pool, size_t size, Rng& rng) {
    std::vector<VertexId> picked;
    std::set<size_t> used;
    while (picked.size() < size) {
        const size_t k = rng.below(pool.size());
        if (used.insert(k).second) picked.push_back(pool[k]);
    }
    return VertexSubset(std::move(picked));
}

} // namespace

PlantedPartition synth_planted_partition(int classes, size_t vertices, size_t edge_count,
                                         double homophily, uint64_t seed, size_t feature_dim,
                                         double feature_offset) {
    if (classes < 2) throw InputError("synth_planted_partition: need at least 2 classes");
    if (vertices < static_cast<size_t>(classes) * 4)
        throw InputError("synth_planted_partition: too few vertices for the class count");
    Rng rng(seed);

    std::vector<int> labels(vertices);
    for (size_t v = 0; v < vertices; ++v) labels[v] = static_cast<int>(v % classes);
    rng.derive("labels").shuffle(labels);

    // Block means: class c raises coordinates [c·w, (c+1)·w) by a fixed
    // offset; unit Gaussian noise everywhere.
    const size_t block = std::max<size_t>(feature_dim / classes, 1);
    Rng frng = rng.derive("features");
    std::vector<std::vector<double>> features(vertices, std::vector<double>(feature_dim));
    for (size_t v = 0; v < vertices; ++v) {
        for (size_t i = 0; i < feature_dim; ++i) features[v][i] = frng.normal();
        const size_t begin = static_cast<size_t>(labels[v]) * block;
        for (size_t i = begin; i < std::min(begin + block, feature_dim); ++i)
            features[v][i] += feature_offset;
    }

    std::vector<std::vector<VertexId>> by_class(classes);
    for (size_t v = 0; v < vertices; ++v) by_class[labels[v]].push_back(static_cast<VertexId>(v));
    std::vector<VertexId> all(vertices);
    for (size_t v = 0; v < vertices; ++v) all[v] = static_cast<VertexId>(v);

    Rng erng = rng.derive("edges");
    std::set<VertexSubset> edges;
    size_t attempts = 0;
    const size_t max_attempts = edge_count * 200;
    while (edges.size() < edge_count && attempts++ < max_attempts) {
        const size_t size = 2 + erng.below(2); // sizes 2 and 3
        if (erng.bernoulli(homophily)) {
            const auto& pool = by_class[erng.below(classes)];
            if (pool.size() < size) continue;
            edges.insert(draw_subset(pool, size, erng));
        } else {
            edges.insert(draw_subset(all, size, erng));
        }
    }
    if (edges.size() < edge_count)
        throw InputError("synth_planted_partition: could not place the requested edge count");

    return PlantedPartition{
        Hypergraph(vertices, {edges.begin(), edges.end()}, std::move(features)),
        std::move(labels)};
}

ComboCorpus synth_combos(size_t drug_count, const std::vector<size_t>& orders, uint64_t seed,
                         const ComboParams& params) {
    if (orders.empty()) throw InputError("synth_combos: order list is empty");
    std::vector<size_t> sorted_orders = orders;
    std::sort(sorted_orders.begin(), sorted_orders.end());
    if (sorted_orders.front() < 2) throw InputError("synth_combos: orders must be >= 2");
    Rng rng(seed);

    std::vector<int> group(drug_count);
    for (size_t d = 0; d < drug_count; ++d) group[d] = static_cast<int>(d % params.groups);
    rng.derive("groups").shuffle(group);
    std::vector<std::vector<VertexId>> by_group(params.groups);
    for (size_t d = 0; d < drug_count; ++d) by_group[group[d]].push_back(static_cast<VertexId>(d));

    Rng frng = rng.derive("features");
    const size_t block = std::max<size_t>(params.feature_dim / params.groups, 1);
    std::vector<std::vector<double>> features(drug_count, std::vector<double>(params.feature_dim));
    for (size_t d = 0; d < drug_count; ++d) {
        for (size_t i = 0; i < params.feature_dim; ++i)
            features[d][i] = frng.normal(0.0, params.feature_noise);
        const size_t begin = static_cast<size_t>(group[d]) * block;
        for (size_t i = begin; i < std::min(begin + block, params.feature_dim); ++i)
            features[d][i] += 1.0;
    }

    Rng prng = rng.derive("positives");
    std::set<VertexSubset> positive_set;
    std::map<size_t, std::vector<VertexSubset>> by_order;
    const size_t min_order = sorted_orders.front();
    for (size_t o : sorted_orders) {
        const size_t shift = o - min_order;
        const size_t target = std::max<size_t>(4, params.base_count >> shift);
        size_t attempts = 0;
        auto& bucket = by_order[o];
        while (bucket.size() < target && attempts++ < target * 300) {
            VertexSubset candidate;
            if (o == min_order || by_order[o - 1].empty()) {
                const auto& pool = by_group[prng.below(params.groups)];
                if (pool.size() < o) continue;
                candidate = draw_subset(pool, o, prng);
            } else {
                // Extend a lower-order positive within its group.
                const auto& parents = by_order[o - 1];
                const VertexSubset& parent = parents[prng.below(parents.size())];
                const auto& pool = by_group[group[parent.members().front()]];
                if (pool.size() <= parent.size()) continue;
                const VertexId extra = pool[prng.below(pool.size())];
                if (parent.contains(extra)) continue;
                candidate = parent.with(extra);
            }
            if (positive_set.insert(candidate).second) bucket.push_back(candidate);
        }
    }

    ComboCorpus corpus{Hypergraph(drug_count, {positive_set.begin(), positive_set.end()},
                                  std::move(features)),
                       {}, {}};
    Rng nrng = rng.derive("negatives");
    std::set<VertexSubset> negative_set;
    for (const auto& [o, bucket] : by_order) {
        corpus.positives_per_order[o] = bucket.size();
        for (const auto& pos : bucket) {
            corpus.samples.push_back({pos, std::nullopt, 1.0});
            if (!params.make_negatives) continue;
            for (size_t attempt = 0; attempt < 200; ++attempt) {
                const auto& m = pos.members();
                const VertexId out = m[nrng.below(m.size())];
                const VertexId in = static_cast<VertexId>(nrng.below(drug_count));
                if (pos.contains(in)) continue;
                if (params.cross_group_negatives && group[in] == group[m.front()]) continue;
                VertexSubset neg = pos.without(out).with(in);
                if (positive_set.count(neg) || !negative_set.insert(neg).second) continue;
                corpus.samples.push_back({neg, std::nullopt, 0.0});
                break;
            }
        }
    }
    return corpus;
}

} // namespace hyperlat
