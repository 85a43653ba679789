#include "hyperlat/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace hyperlat {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Hypergraph load_hypergraph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    size_t lineno = 0;

    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    ++lineno;
    std::istringstream header(line);
    std::string tag;
    size_t n = 0, dim = 0;
    if (!(header >> tag >> n >> dim) || tag != "hypergraph")
        throw ParseError(path + ":1: expected header 'hypergraph <num_vertices> <feature_dim>'");

    std::vector<VertexSubset> edges;
    std::set<VertexSubset> seen;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<VertexId> ids;
        long long v;
        while (ls >> v) {
            if (v < 0 || static_cast<size_t>(v) >= n)
                throw ParseError(path + ":" + std::to_string(lineno) + ": vertex id " +
                                 std::to_string(v) + " out of range [0," + std::to_string(n) + ")");
            ids.push_back(static_cast<VertexId>(v));
        }
        if (!ls.eof())
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed hyperedge line");
        if (ids.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty hyperedge");
        VertexSubset s(std::move(ids));
        if (!seen.insert(s).second)
            throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate hyperedge " +
                             s.to_string());
        edges.push_back(std::move(s));
    }

    std::vector<std::vector<double>> features;
    if (dim > 0) {
        const std::string fpath = path + ".features";
        std::ifstream fin(fpath);
        if (!fin) throw ParseError("missing companion feature table " + fpath);
        features.resize(n, std::vector<double>(dim));
        for (size_t r = 0; r < n; ++r) {
            for (size_t c = 0; c < dim; ++c)
                if (!(fin >> features[r][c]))
                    throw ParseError(fpath + ": row " + std::to_string(r + 1) +
                                     ": expected " + std::to_string(dim) + " values");
        }
    }
    return Hypergraph(n, std::move(edges), std::move(features));
}

void save_hypergraph(const Hypergraph& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    out << "hypergraph " << h.num_vertices() << " " << h.feature_dim() << "\n";
    for (const auto& e : h.hyperedges()) {
        const auto& m = e.members();
        for (size_t i = 0; i < m.size(); ++i) out << (i ? " " : "") << m[i];
        out << "\n";
    }
    if (h.feature_dim() > 0) {
        std::ofstream fout(path + ".features");
        if (!fout) throw ParseError("cannot open " + path + ".features for writing");
        for (VertexId v = 0; v < h.num_vertices(); ++v) {
            auto row = h.feature_row(v);
            for (size_t c = 0; c < row.size(); ++c) fout << (c ? " " : "") << fmt_double(row[c]);
            fout << "\n";
        }
    }
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<int> labels;
    int v;
    while (in >> v) labels.push_back(v);
    return labels;
}

void save_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    for (int v : labels) out << v << "\n";
}

std::vector<ComboSample> load_combos(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<ComboSample> samples;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ComboSample s;
        std::string effect;
        if (!(ls >> s.label >> effect))
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'label effect ids...'");
        if (effect != "-") {
            try {
                s.side_effect = std::stoi(effect);
            } catch (...) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad side-effect id '" +
                                 effect + "'");
            }
        }
        std::vector<VertexId> ids;
        long long v;
        while (ls >> v) ids.push_back(static_cast<VertexId>(v));
        if (ids.size() < 2)
            throw ParseError(path + ":" + std::to_string(lineno) + ": combination needs >= 2 drugs");
        s.drugs = VertexSubset(std::move(ids));
        samples.push_back(std::move(s));
    }
    return samples;
}

void save_combos(const std::vector<ComboSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    for (const auto& s : samples) {
        out << s.label << " " << (s.side_effect ? std::to_string(*s.side_effect) : "-");
        for (VertexId v : s.drugs.members()) out << " " << v;
        out << "\n";
    }
}

namespace {

struct ConfigField {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T parse_value(const std::string& key, const std::string& text);

template <>
double parse_value<double>(const std::string& key, const std::string& text) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ParseError("config: bad numeric value '" + text + "' for key " + key);
    }
}

template <>
uint64_t parse_value<uint64_t>(const std::string& key, const std::string& text) {
    try {
        size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ParseError("config: bad integer value '" + text + "' for key " + key);
    }
}

template <>
int64_t parse_value<int64_t>(const std::string& key, const std::string& text) {
    return static_cast<int64_t>(parse_value<uint64_t>(key, text));
}

const std::map<std::string, ConfigField>& config_fields() {
    static const std::map<std::string, ConfigField> fields = [] {
        std::map<std::string, ConfigField> f;
        auto reg = [&f](const std::string& key, auto member) {
            using T = std::decay_t<decltype(std::declval<RunConfig>().*member)>;
            f[key] = ConfigField{
                [key, member](RunConfig& c, const std::string& text) {
                    c.*member = parse_value<T>(key, text);
                },
                [member](const RunConfig& c) {
                    if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*member);
                    else return std::to_string(c.*member);
                }};
        };
        reg("seed", &RunConfig::seed);
        reg("max_order", &RunConfig::max_order);
        reg("per_order_budget", &RunConfig::per_order_budget);
        reg("neg_quota", &RunConfig::neg_quota);
        reg("swap_repeats", &RunConfig::swap_repeats);
        reg("num_views", &RunConfig::num_views);
        reg("hidden_dim", &RunConfig::hidden_dim);
        reg("layers", &RunConfig::layers);
        reg("heads", &RunConfig::heads);
        reg("dropout", &RunConfig::dropout);
        reg("ffn_multiplier", &RunConfig::ffn_multiplier);
        reg("mask_ratio", &RunConfig::mask_ratio);
        reg("lambda_exist", &RunConfig::lambda_exist);
        reg("ema_decay", &RunConfig::ema_decay);
        reg("pretrain_epochs", &RunConfig::pretrain_epochs);
        reg("pretrain_patience", &RunConfig::pretrain_patience);
        reg("pretrain_batch", &RunConfig::pretrain_batch);
        reg("pretrain_lr", &RunConfig::pretrain_lr);
        reg("pretrain_weight_decay", &RunConfig::pretrain_weight_decay);
        reg("clip_norm", &RunConfig::clip_norm);
        reg("finetune_epochs", &RunConfig::finetune_epochs);
        reg("finetune_patience", &RunConfig::finetune_patience);
        reg("finetune_batch", &RunConfig::finetune_batch);
        reg("finetune_lr", &RunConfig::finetune_lr);
        reg("finetune_weight_decay", &RunConfig::finetune_weight_decay);
        return f;
    }();
    return fields;
}

} // namespace

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = config_fields().find(key);
        if (it == config_fields().end())
            throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second.set(cfg, value);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const auto& [key, field] : config_fields())
        out += key + " = " + field.get(*this) + "\n";
    return out;
}

DagConfig RunConfig::dag() const {
    DagConfig d;
    d.max_order = max_order;
    d.per_order_budget = per_order_budget;
    d.neg_quota = neg_quota;
    d.swap_repeats = swap_repeats;
    d.num_views = num_views;
    d.seed = seed;
    return d;
}

EncoderConfig RunConfig::encoder(int64_t feature_dim) const {
    EncoderConfig e;
    e.feature_dim = feature_dim;
    e.hidden = hidden_dim;
    e.layers = layers;
    e.heads = heads;
    e.dropout = dropout;
    e.ffn_multiplier = ffn_multiplier;
    e.max_order = max_order;
    e.num_views = num_views;
    return e;
}

PretrainConfig RunConfig::pretrain() const {
    PretrainConfig p;
    p.mask_ratio = mask_ratio;
    p.lambda_exist = lambda_exist;
    p.epochs = pretrain_epochs;
    p.patience = pretrain_patience;
    p.batch_size = pretrain_batch;
    p.learning_rate = pretrain_lr;
    p.weight_decay = pretrain_weight_decay;
    p.clip_norm = clip_norm;
    p.ema_decay = ema_decay;
    p.seed = seed;
    return p;
}

TrainOptions RunConfig::finetune() const {
    TrainOptions t;
    t.epochs = finetune_epochs;
    t.patience = finetune_patience;
    t.batch_size = finetune_batch;
    t.learning_rate = finetune_lr;
    t.weight_decay = finetune_weight_decay;
    t.clip_norm = clip_norm;
    t.seed = seed;
    return t;
}

} // namespace hyperlat
