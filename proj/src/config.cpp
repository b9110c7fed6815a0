#include "sntk/config.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "sntk/errors.hpp"

namespace sntk {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_key(const std::string& where, const std::string& key) {
    throw invalid_input("config: unknown key '" + key + "' in " + where);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return key == k;
            }) == allowed.end())
            bad_key(where, key);
    }
}

double want_number(const json& v, const std::string& name) {
    if (!v.is_number())
        throw invalid_input("config: '" + name + "' must be a number");
    return v.get<double>();
}

std::size_t want_count(const json& v, const std::string& name) {
    if (!v.is_number_unsigned())
        throw invalid_input("config: '" + name + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::string want_string(const json& v, const std::string& name) {
    if (!v.is_string())
        throw invalid_input("config: '" + name + "' must be a string");
    return v.get<std::string>();
}

void apply_dataset(ExperimentConfig& cfg, const json& s) {
    check_keys(s, "dataset",
               {"generator", "d", "n", "min_sep", "max_tries", "images",
                "labels", "limit", "positive_class", "path"});
    auto& d = cfg.dataset;
    if (s.contains("generator")) {
        d.generator = want_string(s["generator"], "dataset.generator");
        static const char* known[] = {"linear_teacher", "separated",
                                      "orthonormal", "mnist_idx", "csv"};
        if (std::find_if(std::begin(known), std::end(known), [&](const char* g) {
                return d.generator == g;
            }) == std::end(known))
            throw invalid_input("config: unknown dataset.generator '" +
                                d.generator + "'");
    }
    if (s.contains("d")) d.d = want_count(s["d"], "dataset.d");
    if (s.contains("n")) d.n = want_count(s["n"], "dataset.n");
    if (s.contains("min_sep")) d.min_sep = want_number(s["min_sep"], "dataset.min_sep");
    if (s.contains("max_tries")) d.max_tries = want_count(s["max_tries"], "dataset.max_tries");
    if (s.contains("images")) d.images = want_string(s["images"], "dataset.images");
    if (s.contains("labels")) d.labels = want_string(s["labels"], "dataset.labels");
    if (s.contains("limit")) d.limit = want_count(s["limit"], "dataset.limit");
    if (s.contains("positive_class")) {
        if (!s["positive_class"].is_number_integer())
            throw invalid_input("config: 'dataset.positive_class' must be an integer");
        d.positive_class = s["positive_class"].get<int>();
    }
    if (s.contains("path")) d.path = want_string(s["path"], "dataset.path");
}

void apply_model(ExperimentConfig& cfg, const json& s) {
    check_keys(s, "model", {"m", "B", "init"});
    if (s.contains("m")) cfg.model.m = want_count(s["m"], "model.m");
    if (s.contains("B")) {
        cfg.model.B = want_number(s["B"], "model.B");
        if (cfg.model.B < 0.0)
            throw invalid_input("config: model.B must be >= 0");
    }
    if (s.contains("init")) {
        const std::string kind = want_string(s["init"], "model.init");
        if (kind == "standard")
            cfg.model.init = InitKind::standard;
        else if (kind == "symmetric")
            cfg.model.init = InitKind::symmetric;
        else
            throw invalid_input("config: model.init must be standard|symmetric");
    }
}

void apply_train(ExperimentConfig& cfg, const json& s) {
    check_keys(s, "train", {"eta", "steps", "path"});
    if (s.contains("eta")) {
        cfg.train.eta = want_number(s["eta"], "train.eta");
        if (!(cfg.train.eta > 0.0))
            throw invalid_input("config: train.eta must be > 0");
    }
    if (s.contains("steps")) cfg.train.steps = want_count(s["steps"], "train.steps");
    if (s.contains("path")) {
        const std::string p = want_string(s["path"], "train.path");
        if (p == "dense")
            cfg.train.path = TrainPath::dense;
        else if (p == "sparse")
            cfg.train.path = TrainPath::sparse;
        else
            throw invalid_input("config: train.path must be dense|sparse");
    }
}

void apply_ntk(ExperimentConfig& cfg, const json& s) {
    check_keys(s, "ntk", {"method", "mc_samples"});
    if (s.contains("method")) {
        cfg.ntk.method = want_string(s["method"], "ntk.method");
        if (cfg.ntk.method != "quadrature" && cfg.ntk.method != "mc")
            throw invalid_input("config: ntk.method must be quadrature|mc");
    }
    if (s.contains("mc_samples"))
        cfg.ntk.mc_samples = want_count(s["mc_samples"], "ntk.mc_samples");
}

void apply_bounds(ExperimentConfig& cfg, const json& s) {
    check_keys(s, "bounds", {"delta", "constants", "checkpoint"});
    if (s.contains("delta")) {
        cfg.bounds.delta = want_number(s["delta"], "bounds.delta");
        if (!(cfg.bounds.delta > 0.0 && cfg.bounds.delta < 1.0))
            throw invalid_input("config: bounds.delta must be in (0,1)");
    }
    if (s.contains("checkpoint"))
        cfg.bounds.checkpoint = want_string(s["checkpoint"], "bounds.checkpoint");
    if (s.contains("constants")) {
        const json& c = s["constants"];
        check_keys(c, "bounds.constants",
                   {"flipping_c", "initial_error_C", "sparsity_max_drift"});
        if (c.contains("flipping_c"))
            cfg.bounds.flipping_c = want_number(c["flipping_c"], "flipping_c");
        if (c.contains("initial_error_C"))
            cfg.bounds.initial_error_C =
                want_number(c["initial_error_C"], "initial_error_C");
        if (c.contains("sparsity_max_drift"))
            cfg.bounds.sparsity_max_drift =
                want_number(c["sparsity_max_drift"], "sparsity_max_drift");
    }
}

void apply_output(ExperimentConfig& cfg, const json& s) {
    check_keys(s, "output", {"dir", "formats"});
    if (s.contains("dir")) cfg.output.dir = want_string(s["dir"], "output.dir");
    if (s.contains("formats")) {
        if (!s["formats"].is_array())
            throw invalid_input("config: output.formats must be an array");
        cfg.output.formats.clear();
        for (const auto& f : s["formats"]) {
            const std::string fmt = want_string(f, "output.formats[]");
            if (fmt != "csv" && fmt != "json" && fmt != "svg")
                throw invalid_input("config: unknown output format '" + fmt + "'");
            cfg.output.formats.push_back(fmt);
        }
    }
}

void apply_document(ExperimentConfig& cfg, const json& doc) {
    if (!doc.is_object()) throw invalid_input("config: top level must be an object");
    check_keys(doc, "config",
               {"seed", "dataset", "model", "train", "ntk", "bounds", "output"});
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned())
            throw invalid_input("config: 'seed' must be a nonnegative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("dataset")) apply_dataset(cfg, doc["dataset"]);
    if (doc.contains("model")) apply_model(cfg, doc["model"]);
    if (doc.contains("train")) apply_train(cfg, doc["train"]);
    if (doc.contains("ntk")) apply_ntk(cfg, doc["ntk"]);
    if (doc.contains("bounds")) apply_bounds(cfg, doc["bounds"]);
    if (doc.contains("output")) apply_output(cfg, doc["output"]);
}

json parse_override_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) return json(text);  // plain string fallback
    return v;
}

}  // namespace

bool ExperimentConfig::wants_format(const std::string& fmt) const {
    return std::find(output.formats.begin(), output.formats.end(), fmt) !=
           output.formats.end();
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides,
                             std::optional<std::string> out_dir_override,
                             std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw io_error("config: cannot open " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded())
        throw invalid_input("config: " + path + " is not valid JSON");

    // --set key=value patches the document before validation.
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0)
            throw invalid_input("config: override '" + ov + "' is not key=value");
        const std::string dotted = ov.substr(0, eq);
        const json value = parse_override_value(ov.substr(eq + 1));
        json* node = &doc;
        std::size_t start = 0;
        while (true) {
            const auto dot = dotted.find('.', start);
            const std::string part = dotted.substr(
                start, dot == std::string::npos ? std::string::npos : dot - start);
            if (part.empty())
                throw invalid_input("config: override key '" + dotted +
                                    "' has an empty path segment");
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }

    ExperimentConfig cfg;
    apply_document(cfg, doc);
    if (out_dir_override) cfg.output.dir = *out_dir_override;
    if (seed_override) cfg.seed = *seed_override;
    return cfg;
}

Dataset make_dataset(const ExperimentConfig& cfg) {
    const auto& d = cfg.dataset;
    if (d.generator == "linear_teacher")
        return gen_linear_teacher(d.d, d.n, RngStream(cfg.seed, streams::data_points));
    if (d.generator == "separated")
        return gen_separated(d.d, d.n, d.min_sep,
                             RngStream(cfg.seed, streams::data_points), d.max_tries);
    if (d.generator == "orthonormal")
        return gen_orthonormal(d.d, d.n, RngStream(cfg.seed, streams::data_points));
    if (d.generator == "mnist_idx")
        return load_mnist_idx(d.images, d.labels, d.limit, d.positive_class);
    if (d.generator == "csv") return load_csv(d.path);
    throw invalid_input("config: unknown dataset.generator '" + d.generator + "'");
}

ModelState make_model(const ExperimentConfig& cfg, std::size_t input_dim) {
    InitScheme scheme;
    scheme.kind = cfg.model.init;
    scheme.bias_init = cfg.model.B;
    scheme.seed = cfg.seed;
    return init(scheme, cfg.model.m, input_dim);
}

}  // namespace sntk
