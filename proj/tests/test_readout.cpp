#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hyperlat/harness.hpp"
#include "hyperlat/pretrain.hpp"
#include "hyperlat/readout.hpp"
#include "hyperlat/synth.hpp"

using namespace hyperlat;

namespace {

EncoderConfig tiny_cfg(int64_t feature_dim, size_t views = 2) {
    EncoderConfig cfg;
    cfg.feature_dim = feature_dim;
    cfg.hidden = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.dropout = 0.0;
    cfg.ffn_multiplier = 2;
    cfg.max_order = 3;
    cfg.num_views = views;
    return cfg;
}

struct NodeFixture {
    PlantedPartition task;
    DagConfig dag_cfg;
    std::vector<TokenSequence> corpus;

    static NodeFixture make(uint64_t seed = 7) {
        NodeFixture fx{synth_planted_partition(2, 16, 20, 0.9, seed, 4), {}, {}};
        fx.dag_cfg.max_order = 3;
        fx.dag_cfg.per_order_budget = 3;
        fx.dag_cfg.num_views = 2;
        fx.dag_cfg.seed = seed;
        fx.corpus = build_corpus(fx.task.h, fx.dag_cfg, 1);
        return fx;
    }
};

} // namespace

TEST_CASE("attention pool: weights form a distribution over non-pad tokens") {
    NodeFixture fx = NodeFixture::make();
    NodeModel model = NodeModel::create(tiny_cfg(4), 2, 3);
    auto alpha = node_pool_weights(model, fx.corpus[0]);
    double total = 0.0;
    for (size_t i = 0; i < alpha.size(); ++i) {
        if (fx.corpus[0].is_pad[i]) CHECK(alpha[i] == 0.0);
        total += alpha[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("attention pool: zero scorer means a uniform distribution") {
    NodeFixture fx = NodeFixture::make(9);
    NodeModel model = NodeModel::create(tiny_cfg(4), 2, 5);
    std::fill(model.readout.pool_w.data().begin(), model.readout.pool_w.data().end(), 0.0);
    auto alpha = node_pool_weights(model, fx.corpus[1]);
    const double n = static_cast<double>(fx.corpus[1].num_real_tokens());
    for (size_t i = 0; i < alpha.size(); ++i)
        if (!fx.corpus[1].is_pad[i])
            CHECK(alpha[i] == doctest::Approx(1.0 / n).epsilon(1e-12));
}

TEST_CASE("single-token DAG: the pool collapses onto the center") {
    Hypergraph h(4, {{1, 2}}, std::vector<std::vector<double>>(4, {0.1, 0.2}));
    DagConfig dcfg;
    dcfg.max_order = 3;
    dcfg.per_order_budget = 2;
    dcfg.num_views = 1;
    TokenSequence seq = linearize(build_dag(h, 0, dcfg), dcfg);
    REQUIRE(seq.num_real_tokens() == 1);

    NodeModel model = NodeModel::create(tiny_cfg(2, 1), 2, 7);
    auto alpha = node_pool_weights(model, seq);
    CHECK(alpha[seq.center_positions[0]] == 1.0);
    Tensor logits = node_logits(model, seq, false, Rng(0));
    for (double v : logits.data()) CHECK(std::isfinite(v));
}

TEST_CASE("combo scoring: member order is irrelevant, outputs lie in (0,1)") {
    auto corpus = synth_combos(12, {2, 3}, 3);
    ComboModel model = ComboModel::create(tiny_cfg(16), 2, 11);
    DagConfig dcfg;
    dcfg.max_order = 3;
    dcfg.per_order_budget = 3;
    dcfg.num_views = 2;

    const VertexSubset forward{1, 4, 7};
    const VertexSubset reversed{7, 4, 1}; // canonicalizes to the same subset
    const double s1 = combo_score(model, corpus.h, dcfg, forward, std::nullopt);
    const double s2 = combo_score(model, corpus.h, dcfg, reversed, std::nullopt);
    CHECK(s1 == s2);
    CHECK(s1 > 0.0);
    CHECK(s1 < 1.0);
}

TEST_CASE("combo scoring: absent side effect contributes an exact zero row") {
    auto corpus = synth_combos(10, {2, 3}, 5);
    ComboModel model = ComboModel::create(tiny_cfg(16), 3, 13);
    DagConfig dcfg;
    dcfg.max_order = 3;
    dcfg.per_order_budget = 2;
    dcfg.num_views = 1;

    // Zero the learned row for effect 0; conditioning on it must then match
    // the unconditional score exactly.
    const int64_t d = model.cfg.hidden;
    for (int64_t j = 0; j < d; ++j) model.readout.effect_table.data()[j] = 0.0;
    const VertexSubset drugs{0, 3};
    CHECK(combo_score(model, corpus.h, dcfg, drugs, std::nullopt) ==
          combo_score(model, corpus.h, dcfg, drugs, 0));

    CHECK_THROWS_AS(combo_score(model, corpus.h, dcfg, drugs, 9), InputError);
    CHECK_THROWS_AS(combo_score(model, corpus.h, dcfg, VertexSubset{1}, std::nullopt),
                    InputError);
}

TEST_CASE("transfer: fresh checkpoint loads the whole backbone, heads reinitialize") {
    EncoderConfig cfg = tiny_cfg(4);
    PretrainModel pre = PretrainModel::create(cfg, 17);
    CheckpointData ckpt = snapshot(pre.store);

    NodeModel node = NodeModel::create(cfg, 3, 99);
    auto report = transfer(ckpt, node.store);
    CHECK(report.missing.empty());
    CHECK(report.complete());
    size_t backbone = 0, readout_params = 0;
    for (const auto& name : node.store.names()) {
        if (TransferManifest::is_transferable(name)) ++backbone;
        else ++readout_params;
    }
    CHECK(report.loaded.size() == backbone);
    CHECK(report.reinitialized.size() == readout_params);
    for (const auto& name : report.loaded)
        CHECK(node.store.get(name).data() == ckpt.at(name).values);
}

TEST_CASE("transfer: shape mismatch names the parameter, empty archive is non-strict") {
    EncoderConfig small = tiny_cfg(4);
    PretrainModel pre = PretrainModel::create(small, 19);
    CheckpointData ckpt = snapshot(pre.store);

    EncoderConfig wide = tiny_cfg(4);
    wide.hidden = 16;
    wide.heads = 2;
    NodeModel node = NodeModel::create(wide, 3, 23);
    try {
        transfer(ckpt, node.store);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("shape mismatch") != std::string::npos);
        CHECK(std::string(e.what()).find("feature_projection") != std::string::npos);
    }

    NodeModel fresh = NodeModel::create(small, 3, 29);
    auto report = transfer(CheckpointData{}, fresh.store);
    CHECK(report.loaded.empty());
    CHECK_FALSE(report.complete()); // everything transferable is missing
    CHECK(report.missing.size() > 0);
}

TEST_CASE("transfer: idempotent") {
    EncoderConfig cfg = tiny_cfg(4);
    PretrainModel pre = PretrainModel::create(cfg, 31);
    CheckpointData ckpt = snapshot(pre.store);
    NodeModel node = NodeModel::create(cfg, 2, 37);
    transfer(ckpt, node.store);
    CheckpointData once = snapshot(node.store);
    transfer(ckpt, node.store);
    CheckpointData twice = snapshot(node.store);
    CHECK(once == twice);
}

TEST_CASE("manifest: every parameter of every model is classified") {
    EncoderConfig cfg = tiny_cfg(4);
    PretrainModel pre = PretrainModel::create(cfg, 41);
    NodeModel node = NodeModel::create(cfg, 2, 43);
    ComboModel combo = ComboModel::create(cfg, 2, 47);
    for (const ParamStore* store : {&pre.store, &node.store, &combo.store})
        for (const auto& name : store->names())
            CHECK((TransferManifest::is_transferable(name) || TransferManifest::is_reinit(name)));
}

TEST_CASE("node readout trains above chance on an easy planted task") {
    NodeFixture fx = NodeFixture::make(53);
    NodeModel model = NodeModel::create(tiny_cfg(4), 2, 59);
    Splits split = fraction_split(fx.corpus.size(), 0.5, 0.25, 4);
    TrainOptions opt;
    opt.epochs = 30;
    opt.patience = 30;
    opt.batch_size = 8;
    opt.seed = 61;
    auto fit = train_node_readout(model, fx.corpus, fx.task.labels, split.train, split.val, opt);
    CHECK(fit.best_val_metric >= 0.5);
    auto preds = predict_node(model, fx.corpus, split.test);
    CHECK(preds.size() == split.test.size());
}

TEST_CASE("leakage-safe scoring hides an observed combination from its own DAGs") {
    auto corpus = synth_combos(10, {2, 3}, 67);
    ComboModel model = ComboModel::create(tiny_cfg(16), 1, 71);
    DagConfig dcfg;
    dcfg.max_order = 3;
    dcfg.per_order_budget = 3;
    dcfg.num_views = 1;
    dcfg.seed = 5;

    size_t positive = corpus.samples.size();
    for (size_t i = 0; i < corpus.samples.size(); ++i)
        if (corpus.samples[i].label == 1.0 && corpus.h.has_edge(corpus.samples[i].drugs))
            positive = i;
    REQUIRE(positive < corpus.samples.size());

    auto safe = score_combos_leakage_safe(model, corpus.h, dcfg, corpus.samples, {positive});
    Hypergraph masked = corpus.h.without_edge(corpus.samples[positive].drugs);
    const double expected =
        combo_score(model, masked, dcfg, corpus.samples[positive].drugs, std::nullopt);
    CHECK(safe[0] == expected);
}
