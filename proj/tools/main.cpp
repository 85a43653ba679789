#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "hyperlat/gradcheck.hpp"
#include "hyperlat/harness.hpp"
#include "hyperlat/io.hpp"
#include "hyperlat/lattice.hpp"
#include "hyperlat/metrics.hpp"
#include "hyperlat/synth.hpp"
#include "hyperlat/wl.hpp"

using namespace hyperlat;

namespace {

void echo_config(const RunConfig& cfg) {
    std::istringstream lines(cfg.to_text());
    std::string line;
    while (std::getline(lines, line)) std::cout << "config." << line << "\n";
}

std::vector<size_t> parse_order_list(const std::string& text) {
    std::vector<size_t> orders;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) orders.push_back(std::stoul(item));
    return orders;
}

VertexSubset parse_subset(const std::string& text) {
    std::vector<VertexId> ids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) ids.push_back(static_cast<VertexId>(std::stoul(item)));
    return VertexSubset(std::move(ids));
}

int cmd_analyze(const std::string& input, size_t max_order, const std::string& mobius_set) {
    Hypergraph h = load_hypergraph(input);
    if (max_order == 0) {
        // One order above the largest edge, so inhibitory covers over the
        // maximal hyperedges are reported too.
        for (const auto& e : h.hyperedges()) max_order = std::max(max_order, e.size() + 1);
    }
    max_order = std::min(max_order, h.num_vertices());

    auto structure = comp_structure(h, max_order);
    std::cout << "analyze.num_vertices = " << h.num_vertices() << "\n";
    std::cout << "analyze.num_hyperedges = " << h.num_edges() << "\n";
    std::cout << "analyze.max_order = " << max_order << "\n";
    size_t n_comp = 0, n_emer = 0, n_inhib = 0;
    for (const auto& c : structure.covers) {
        if (c.label == CompLabel::COMP) ++n_comp;
        else if (c.label == CompLabel::EMER) ++n_emer;
        else ++n_inhib;
    }
    std::cout << "analyze.covers.comp = " << n_comp << "\n";
    std::cout << "analyze.covers.emer = " << n_emer << "\n";
    std::cout << "analyze.covers.inhib = " << n_inhib << "\n";
    for (const auto& c : structure.covers)
        if (c.label != CompLabel::COMP)
            std::cout << "analyze.cover " << to_string(c.label) << " " << c.sub.to_string()
                      << " -> " << c.super.to_string() << "\n";

    if (h.num_vertices() <= 20) {
        const bool direct = is_simplicial_direct(h);
        const bool scan = is_simplicial_emer_scan(h);
        std::cout << "analyze.simplicial.direct = " << (direct ? "true" : "false") << "\n";
        std::cout << "analyze.simplicial.emer_scan = " << (scan ? "true" : "false") << "\n";
        if (direct != scan) {
            std::cerr << "analyze: simplicial dual check disagrees\n";
            return 1;
        }
    }

    VertexSubset target;
    if (!mobius_set.empty()) target = parse_subset(mobius_set);
    else {
        std::vector<VertexId> all(h.num_vertices());
        for (VertexId v = 0; v < h.num_vertices(); ++v) all[v] = v;
        target = VertexSubset(std::move(all));
    }
    if (target.size() <= 20)
        std::cout << "analyze.mobius" << target.to_string() << " = " << mobius(h, target) << "\n";
    return 0;
}

int cmd_wl(const std::string& input, const std::string& other, size_t max_iters) {
    Hypergraph h = load_hypergraph(input);
    auto state = wl_refine(h, max_iters);
    std::cout << "wl.vertex_classes = " << state.num_vertex_classes() << "\n";
    std::cout << "wl.edge_classes = " << state.num_edge_classes() << "\n";
    std::cout << "wl.stable = " << (state.stable ? "true" : "false") << "\n";
    std::cout << "wl.stable_iteration = " << state.stable_iteration << "\n";
    if (other.empty()) return 0;

    Hypergraph g = load_hypergraph(other);
    std::cout << "wl.equivalent = " << (wl_equivalent(h, g) ? "true" : "false") << "\n";
    if (h.num_vertices() <= 10) {
        auto perm = brute_force_isomorphic(h, g);
        if (perm) {
            std::cout << "wl.isomorphism =";
            for (VertexId v : *perm) std::cout << " " << v;
            std::cout << "\n";
        } else {
            std::cout << "wl.isomorphism = absent\n";
        }
    }
    return 0;
}

int cmd_witness() {
    auto rep = witness_report();
    for (const auto& line : rep.lines) std::cout << "witness." << line << "\n";
    std::cout << "witness.overall = " << (rep.ok ? "pass" : "fail") << "\n";
    return rep.ok ? 0 : 1;
}

int cmd_build_dag(const std::string& input, VertexId center, const RunConfig& cfg,
                  bool witness_preset) {
    Hypergraph h = load_hypergraph(input);
    DagConfig dag_cfg = witness_preset ? DagConfig::witness() : cfg.dag();
    InclusionDag dag = build_dag(h, center, dag_cfg);
    const auto counts = dag.source_counts();
    std::cout << "dag.center = " << center << "\n";
    std::cout << "dag.tokens = " << dag.tokens.size() << "\n";
    std::cout << "dag.edges = " << dag.edges.size() << "\n";
    std::cout << "dag.source_counts = (" << counts[0] << "," << counts[1] << "," << counts[2]
              << ")\n";
    for (size_t i = 0; i < dag.tokens.size(); ++i) {
        const auto& t = dag.tokens[i];
        std::cout << "dag.token " << i << " view=" << t.view << " subset=" << t.subset.to_string()
                  << " order=" << t.order << " exists=" << t.exists
                  << " source=" << to_string(t.source) << "\n";
    }
    for (const auto& e : dag.edges)
        std::cout << "dag.edge " << dag.tokens[e.sub_index].subset.to_string() << " -> "
                  << dag.tokens[e.super_index].subset.to_string() << " label="
                  << (e.label ? to_string(*e.label) : "none") << "\n";
    TokenSequence seq = linearize(dag, dag_cfg);
    std::cout << "dag.sequence_length = " << seq.length << "\n";
    std::cout << "dag.sequence_real_tokens = " << seq.num_real_tokens() << "\n";
    return 0;
}

int cmd_pretrain(const std::string& input, const RunConfig& cfg, const std::string& out,
                 const std::string& log_path, size_t workers) {
    Hypergraph h = load_hypergraph(input);
    echo_config(cfg);
    auto corpus = build_corpus(h, cfg.dag(), workers);
    PretrainModel model = PretrainModel::create(cfg.encoder(h.feature_dim()), cfg.seed);
    auto result = pretrain_loop(model, corpus, cfg.pretrain());

    std::ostringstream log;
    for (const auto& rec : result.curve)
        log << "epoch " << rec.epoch << " train_loss " << rec.train_loss << " val_loss "
            << rec.val_loss << " exist_auroc " << rec.val_exist_auroc << "\n";
    if (!log_path.empty()) {
        std::ofstream f(log_path);
        f << cfg.to_text() << log.str();
    }
    std::cout << log.str();
    std::cout << "pretrain.best_epoch = " << result.stopped_epoch << "\n";
    std::cout << "pretrain.best_val_loss = " << result.best_val_loss << "\n";
    save_checkpoint(result.checkpoint, out);
    std::cout << "pretrain.checkpoint = " << out << "\n";
    return 0;
}

int cmd_finetune_or_eval(bool train, const std::string& task, const std::string& input,
                         const std::string& labels_path, const std::string& combos_path,
                         const std::string& ckpt_path, const RunConfig& cfg,
                         const std::string& out) {
    Hypergraph h = load_hypergraph(input);
    echo_config(cfg);
    if (task == "node") {
        auto labels = labels_path.empty() ? load_labels(input + ".labels")
                                          : load_labels(labels_path);
        if (labels.size() != h.num_vertices())
            throw InputError("finetune: label count does not match vertex count");
        const int classes = 1 + *std::max_element(labels.begin(), labels.end());
        auto corpus = build_corpus(h, cfg.dag());
        NodeModel model = NodeModel::create(cfg.encoder(h.feature_dim()), classes, cfg.seed);
        Splits split = fraction_split(corpus.size(), 0.5, 0.25, cfg.seed);

        if (train) {
            if (!ckpt_path.empty()) {
                auto report = transfer(load_checkpoint(ckpt_path), model.store);
                std::cout << "transfer.loaded = " << report.loaded.size() << "\n";
                std::cout << "transfer.missing = " << report.missing.size() << "\n";
                std::cout << "transfer.reinitialized = " << report.reinitialized.size() << "\n";
            }
            auto fit = train_node_readout(model, corpus, labels, split.train, split.val,
                                          cfg.finetune());
            std::cout << "finetune.best_val_accuracy = " << fit.best_val_metric << "\n";
            if (!out.empty()) save_checkpoint(model.store, out);
        } else {
            if (ckpt_path.empty()) throw InputError("eval: --checkpoint is required");
            load_matching(load_checkpoint(ckpt_path), model.store);
        }
        auto preds = predict_node(model, corpus, split.test);
        std::vector<int> truth;
        for (size_t k : split.test) truth.push_back(labels[k]);
        std::cout << "metric.test_accuracy = " << accuracy(preds, truth) << "\n";
        std::cout << "metric.test_macro_f1 = " << macro_f1(preds, truth, classes) << "\n";
        return 0;
    }
    if (task == "combo") {
        auto samples = combos_path.empty() ? load_combos(input + ".combos")
                                           : load_combos(combos_path);
        int effects = 0;
        for (const auto& s : samples)
            if (s.side_effect) effects = std::max(effects, *s.side_effect + 1);
        ComboModel model = ComboModel::create(cfg.encoder(h.feature_dim()),
                                              std::max(effects, 1), cfg.seed);
        Splits split = fraction_split(samples.size(), 0.5, 0.25, cfg.seed);

        if (train) {
            if (!ckpt_path.empty()) {
                auto report = transfer(load_checkpoint(ckpt_path), model.store);
                std::cout << "transfer.loaded = " << report.loaded.size() << "\n";
            }
            auto fit = train_combo_readout(model, h, cfg.dag(), samples, split.train, split.val,
                                           cfg.finetune());
            std::cout << "finetune.best_val_auroc = " << fit.best_val_metric << "\n";
            if (!out.empty()) save_checkpoint(model.store, out);
        } else {
            if (ckpt_path.empty()) throw InputError("eval: --checkpoint is required");
            load_matching(load_checkpoint(ckpt_path), model.store);
        }
        auto scores = score_combos_leakage_safe(model, h, cfg.dag(), samples, split.test);
        std::vector<double> truth;
        for (size_t k : split.test) truth.push_back(samples[k].label);
        std::cout << "metric.test_auroc = " << auroc(scores, truth) << "\n";
        std::cout << "metric.test_auprc = " << auprc(scores, truth) << "\n";
        return 0;
    }
    throw InputError("unknown task '" + task + "' (expected node or combo)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypergraph compositionality toolkit"};
    app.require_subcommand(1);

    std::string input, other, out, log_path, labels_path, combos_path, ckpt_path, config_path;
    std::string mobius_set, task = "node", kind = "planted", orders_text = "2,3,4";
    size_t max_order = 0, max_iters = 64, workers = 0, seeds = 20;
    size_t classes = 2, vertices = 60, edge_count = 90, drugs = 40;
    double homophily = 0.9;
    uint64_t seed_flag = 0;
    bool witness_preset = false;
    VertexId center = 0;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run-config file (flat key = value)");
        cmd->add_option("--seed", seed_flag, "override the config seed");
    };
    auto load_config = [&]() {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        if (seed_flag != 0) cfg.seed = seed_flag;
        return cfg;
    };

    auto* analyze = app.add_subcommand("analyze", "composition structure / möbius / simplicial report");
    analyze->add_option("--input", input)->required();
    analyze->add_option("--max-order", max_order, "cover enumeration bound (default: max edge size)");
    analyze->add_option("--mobius", mobius_set, "comma-separated subset for the möbius coefficient");

    auto* wl_cmd = app.add_subcommand("wl", "color refinement, equivalence, isomorphism");
    wl_cmd->add_option("--input", input)->required();
    wl_cmd->add_option("--other", other, "second hypergraph for equivalence/isomorphism");
    wl_cmd->add_option("--max-iters", max_iters);

    app.add_subcommand("witness", "verify the separating-construction report");

    auto* dag_cmd = app.add_subcommand("build-dag", "dump a target-centered inclusion DAG");
    dag_cmd->add_option("--input", input)->required();
    dag_cmd->add_option("--center", center)->required();
    dag_cmd->add_flag("--witness-preset", witness_preset, "deterministic full sampling");
    add_config(dag_cmd);

    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic corpora");
    synth_cmd->add_option("--kind", kind, "planted | combos")->required();
    synth_cmd->add_option("--out", out)->required();
    synth_cmd->add_option("--classes", classes);
    synth_cmd->add_option("--vertices", vertices);
    synth_cmd->add_option("--edges", edge_count);
    synth_cmd->add_option("--homophily", homophily);
    synth_cmd->add_option("--drugs", drugs);
    synth_cmd->add_option("--orders", orders_text, "comma-separated combination sizes");
    synth_cmd->add_option("--seed", seed_flag);

    auto* pre_cmd = app.add_subcommand("pretrain", "masked-reconstruction pretraining");
    pre_cmd->add_option("--input", input)->required();
    pre_cmd->add_option("--out", out)->required();
    pre_cmd->add_option("--log", log_path);
    pre_cmd->add_option("--workers", workers, "DAG-construction workers (0 = all cores)");
    add_config(pre_cmd);

    auto* fit_cmd = app.add_subcommand("finetune", "train a readout (optionally from a checkpoint)");
    fit_cmd->add_option("--task", task, "node | combo")->required();
    fit_cmd->add_option("--input", input)->required();
    fit_cmd->add_option("--labels", labels_path);
    fit_cmd->add_option("--combos", combos_path);
    fit_cmd->add_option("--checkpoint", ckpt_path, "pretrained backbone to transfer");
    fit_cmd->add_option("--out", out);
    add_config(fit_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a finetuned checkpoint");
    eval_cmd->add_option("--task", task, "node | combo")->required();
    eval_cmd->add_option("--input", input)->required();
    eval_cmd->add_option("--labels", labels_path);
    eval_cmd->add_option("--combos", combos_path);
    eval_cmd->add_option("--checkpoint", ckpt_path)->required();
    add_config(eval_cmd);

    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    grad_cmd->add_option("--seeds", seeds);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(input, max_order, mobius_set);
        if (wl_cmd->parsed()) return cmd_wl(input, other, max_iters);
        if (app.get_subcommand("witness")->parsed()) return cmd_witness();
        if (dag_cmd->parsed()) return cmd_build_dag(input, center, load_config(), witness_preset);
        if (synth_cmd->parsed()) {
            const uint64_t seed = seed_flag;
            if (kind == "planted") {
                auto task_data = synth_planted_partition(static_cast<int>(classes), vertices,
                                                         edge_count, homophily, seed);
                save_hypergraph(task_data.h, out);
                save_labels(task_data.labels, out + ".labels");
                std::cout << "synth.hypergraph = " << out << "\n";
                std::cout << "synth.labels = " << out << ".labels\n";
            } else if (kind == "combos") {
                auto corpus = synth_combos(drugs, parse_order_list(orders_text), seed);
                save_hypergraph(corpus.h, out);
                save_combos(corpus.samples, out + ".combos");
                std::cout << "synth.hypergraph = " << out << "\n";
                std::cout << "synth.combos = " << out << ".combos\n";
                for (const auto& [o, n] : corpus.positives_per_order)
                    std::cout << "synth.positives.order" << o << " = " << n << "\n";
            } else {
                throw InputError("unknown synth kind '" + kind + "'");
            }
            return 0;
        }
        if (pre_cmd->parsed())
            return cmd_pretrain(input, load_config(), out, log_path, workers);
        if (fit_cmd->parsed())
            return cmd_finetune_or_eval(true, task, input, labels_path, combos_path, ckpt_path,
                                        load_config(), out);
        if (eval_cmd->parsed())
            return cmd_finetune_or_eval(false, task, input, labels_path, combos_path, ckpt_path,
                                        load_config(), "");
        if (grad_cmd->parsed()) {
            auto ops = check_all_ops(seeds);
            auto loss = check_pretrain_loss(std::min<size_t>(seeds, 20));
            std::cout << "gradcheck.op_checks = " << ops.checks << "\n";
            std::cout << "gradcheck.op_worst_rel_error = " << ops.worst_rel_error << "\n";
            std::cout << "gradcheck.loss_checks = " << loss.checks << "\n";
            std::cout << "gradcheck.loss_worst_rel_error = " << loss.worst_rel_error << "\n";
            for (const auto& f : ops.failures) std::cout << "gradcheck.failure " << f << "\n";
            for (const auto& f : loss.failures) std::cout << "gradcheck.failure " << f << "\n";
            const bool ok = ops.ok() && loss.ok();
            std::cout << "gradcheck.overall = " << (ok ? "pass" : "fail") << "\n";
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
