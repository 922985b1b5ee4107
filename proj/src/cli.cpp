#include "ssllab/cli.hpp"

#include "ssllab/eval.hpp"
#include "ssllab/io.hpp"
#include "ssllab/plot.hpp"
#include "ssllab/registry.hpp"
#include "ssllab/replicate.hpp"
#include "ssllab/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace ssllab {

namespace {

using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used, 10);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + " must be a non-negative integer, got '" + text + "'");
    }
}

// Flag, then SSLLAB_SEED, then 1.
std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
    if (flag) return parse_seed(*flag, "--seed");
    if (const char* env = std::getenv("SSLLAB_SEED"); env && *env) return parse_seed(env, "SSLLAB_SEED");
    return 1;
}

// Numeric CLI flags that map onto JSON keys of the same meaning.
struct ParamFlags {
    std::vector<std::pair<CLI::Option*, std::string>> numbers;
    std::vector<std::pair<CLI::Option*, std::string>> integers;
    std::vector<std::pair<CLI::Option*, std::string>> strings;
    std::vector<std::pair<CLI::Option*, std::string>> bools;
    std::map<std::string, double> number_values;
    std::map<std::string, long long> integer_values;
    std::map<std::string, std::string> string_values;
    std::map<std::string, bool> bool_values;
    std::vector<std::string> extra;  // key=value, value parsed as JSON when possible

    void number(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        numbers.emplace_back(app->add_option(flag, number_values[key], help), key);
    }
    void integer(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        integers.emplace_back(app->add_option(flag, integer_values[key], help), key);
    }
    void text(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        strings.emplace_back(app->add_option(flag, string_values[key], help), key);
    }
    void boolean(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        bools.emplace_back(app->add_option(flag, bool_values[key], help), key);
    }

    json collect() const {
        json j = json::object();
        for (const auto& [opt, key] : numbers) {
            if (opt->count()) j[key] = number_values.at(key);
        }
        for (const auto& [opt, key] : integers) {
            if (opt->count()) j[key] = integer_values.at(key);
        }
        for (const auto& [opt, key] : strings) {
            if (opt->count()) j[key] = string_values.at(key);
        }
        for (const auto& [opt, key] : bools) {
            if (opt->count()) j[key] = bool_values.at(key);
        }
        for (const auto& kv : extra) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
            const auto key = kv.substr(0, eq);
            const auto value = kv.substr(eq + 1);
            json parsed = json::parse(value, nullptr, false);
            j[key] = parsed.is_discarded() ? json(value) : parsed;
        }
        return j;
    }
};

std::string class_summary(const Dataset& d) {
    std::array<std::size_t, 2> c{};
    std::size_t missing = 0;
    for (const auto& l : d.y) {
        if (l) {
            ++c[static_cast<std::size_t>(*l)];
        } else {
            ++missing;
        }
    }
    std::string s = d.class_order[0] + ": " + std::to_string(c[0]) + ", " + d.class_order[1] + ": " + std::to_string(c[1]);
    if (missing) s += ", unlabeled: " + std::to_string(missing);
    return s;
}

double labeled_accuracy(const Params& p, const Dataset& d) {
    const auto sp = split_labeled_unlabeled(d);
    if (sp.yl.empty()) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 - measure_error(p, sp.Xl, sp.yl);
}

// learning-curve config, with JSON pointers in every error.
struct CurveConfig {
    struct DatasetSpec {
        std::string name;
        Dataset data;
    };
    std::vector<DatasetSpec> datasets;
    TrialPlan plan;
};

const json& require(const json& obj, const std::string& key, const std::string& ptr) {
    if (!obj.contains(key)) throw FieldError(ptr + "/" + key, "missing required field");
    return obj.at(key);
}

std::size_t positive_size(const json& v, const std::string& ptr) {
    if (!v.is_number_integer() || v.get<long long>() < 1) throw FieldError(ptr, "expected a positive integer");
    return v.get<std::size_t>();
}

CurveConfig parse_curve_config(const json& cfg, std::optional<std::uint64_t> seed_flag, std::optional<int> jobs_flag) {
    if (!cfg.is_object()) throw FieldError("", "config must be a JSON object");
    static const std::set<std::string> known{"datasets", "classifiers", "n_l",     "sizes",
                                             "repeats",  "measures",    "base_seed", "parallelism"};
    for (const auto& [k, v] : cfg.items()) {
        if (!known.count(k)) throw FieldError("/" + k, "unknown field");
    }
    CurveConfig c;
    auto& plan = c.plan;

    if (seed_flag) {
        plan.base_seed = *seed_flag;
    } else if (cfg.contains("base_seed")) {
        const auto& s = cfg.at("base_seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw FieldError("/base_seed", "expected a non-negative integer");
        }
        plan.base_seed = s.get<std::uint64_t>();
    } else {
        plan.base_seed = resolve_seed(std::nullopt);
    }

    plan.n_l = positive_size(require(cfg, "n_l", ""), "/n_l");
    if (plan.n_l < 2) throw FieldError("/n_l", "must be at least 2");

    const auto& sizes = require(cfg, "sizes", "");
    if (!sizes.is_array() || sizes.empty()) throw FieldError("/sizes", "expected a non-empty array");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto ptr = "/sizes/" + std::to_string(i);
        const auto s = positive_size(sizes[i], ptr);
        if (!plan.sizes.empty() && s <= plan.sizes.back()) throw FieldError(ptr, "sizes must be strictly increasing");
        plan.sizes.push_back(s);
    }

    plan.repeats = static_cast<int>(positive_size(require(cfg, "repeats", ""), "/repeats"));

    const auto& measures = require(cfg, "measures", "");
    if (!measures.is_array() || measures.empty()) throw FieldError("/measures", "expected a non-empty array");
    for (std::size_t i = 0; i < measures.size(); ++i) {
        const auto ptr = "/measures/" + std::to_string(i);
        if (!measures[i].is_string()) throw FieldError(ptr, "expected a measure name");
        try {
            plan.measures.push_back(named_measure(measures[i].get<std::string>()));
        } catch (const ConfigError& e) {
            throw FieldError(ptr, std::string(e.what()) + " (valid: error, loss_test, loss_train)");
        }
    }

    plan.jobs = 1;
    if (jobs_flag) {
        plan.jobs = *jobs_flag;
    } else if (cfg.contains("parallelism")) {
        plan.jobs = static_cast<int>(positive_size(cfg.at("parallelism"), "/parallelism"));
    }

    const auto& classifiers = require(cfg, "classifiers", "");
    if (!classifiers.is_array() || classifiers.empty()) throw FieldError("/classifiers", "expected a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < classifiers.size(); ++i) {
        const auto ptr = "/classifiers/" + std::to_string(i);
        const auto& e = classifiers[i];
        if (!e.is_object()) throw FieldError(ptr, "expected an object");
        for (const auto& [k, v] : e.items()) {
            if (k != "name" && k != "model" && k != "params") throw FieldError(ptr + "/" + k, "unknown field");
        }
        const auto& model = require(e, "model", ptr);
        if (!model.is_string()) throw FieldError(ptr + "/model", "expected a model name");
        const json params = e.contains("params") ? e.at("params") : json::object();
        auto entry = make_classifier(model.get<std::string>(), params, ptr + "/params");
        if (e.contains("name")) {
            if (!e.at("name").is_string() || e.at("name").get<std::string>().empty()) {
                throw FieldError(ptr + "/name", "expected a non-empty string");
            }
            entry.name = e.at("name").get<std::string>();
        }
        if (!names.insert(entry.name).second) throw FieldError(ptr + "/name", "duplicate classifier name " + entry.name);
        plan.classifiers.push_back(std::move(entry));
    }

    const auto& datasets = require(cfg, "datasets", "");
    if (!datasets.is_array() || datasets.empty()) throw FieldError("/datasets", "expected a non-empty array");
    std::set<std::string> dnames;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        const auto ptr = "/datasets/" + std::to_string(i);
        const auto& e = datasets[i];
        if (!e.is_object()) throw FieldError(ptr, "expected an object");
        for (const auto& [k, v] : e.items()) {
            if (k != "name" && k != "generator" && k != "params" && k != "seed") {
                throw FieldError(ptr + "/" + k, "unknown field");
            }
        }
        const auto& gen = require(e, "generator", ptr);
        if (!gen.is_string()) throw FieldError(ptr + "/generator", "expected a generator name");
        std::uint64_t seed = derive_seed(plan.base_seed, {0x5eedull, i});
        if (e.contains("seed")) {
            const auto& s = e.at("seed");
            if (!s.is_number_integer() || s.get<long long>() < 0) throw FieldError(ptr + "/seed", "expected a non-negative integer");
            seed = s.get<std::uint64_t>();
        }
        const json params = e.contains("params") ? e.at("params") : json::object();
        CurveConfig::DatasetSpec spec;
        spec.data = make_dataset(gen.get<std::string>(), params, seed, ptr + "/params");
        spec.name = gen.get<std::string>();
        if (e.contains("name")) {
            if (!e.at("name").is_string()) throw FieldError(ptr + "/name", "expected a string");
            spec.name = e.at("name").get<std::string>();
        }
        if (!dnames.insert(spec.name).second) throw FieldError(ptr + "/name", "duplicate dataset name " + spec.name);
        if (plan.n_l + plan.sizes.back() > spec.data.rows()) {
            throw FieldError("/sizes", "n_l + largest size exceeds the " + std::to_string(spec.data.rows()) +
                                           " rows of dataset " + spec.name);
        }
        c.datasets.push_back(std::move(spec));
    }
    return c;
}

int cmd_generate(const std::string& name, const ParamFlags& flags, const std::optional<std::string>& seed_flag,
                 const std::optional<double>& mar, const std::string& label_col, const std::string& out_path,
                 std::ostream& out) {
    const auto seed = resolve_seed(seed_flag);
    Dataset d = make_dataset(name, flags.collect(), seed, "");
    if (mar) {
        if (!(*mar >= 0.0 && *mar <= 1.0)) throw ConfigError("--mar must lie in [0,1]");
        d = add_missing_labels_mar(d, *mar, derive_seed(seed, {0x3a4ull}));
    }
    write_file_atomic(out_path, data_to_csv(d, {}, label_col));
    out << "wrote " << d.rows() << " rows, " << d.X.cols() << " features (" << class_summary(d) << ") to " << out_path
        << '\n';
    return exit_ok;
}

int cmd_train(const std::string& model, const ParamFlags& flags, const std::string& input, const std::string& label_col,
              const std::optional<std::string>& seed_flag, const std::string& out_path, std::ostream& out) {
    const auto entry = make_classifier(model, flags.collect(), "");
    const auto table = read_data_file(input, label_col);
    const auto& d = table.data;
    const auto sp = split_labeled_unlabeled(d);
    Fit fit = entry.train(sp.Xl, sp.yl, entry.uses_unlabeled ? sp.Xu : Matrix(0, d.X.cols()));
    TrainedModel m;
    m.tag = model;
    m.class_order = d.class_order;
    m.params = fit.params;
    m.responsibilities = fit.responsibilities;
    m.meta = fit.meta;
    m.meta.seed = resolve_seed(seed_flag);
    save_model(out_path, m);
    const double train_loss = mean_loss(m.params, sp.Xl, sp.yl);
    out << "trained " << model << " on " << sp.yl.size() << " labeled and " << sp.Xu.rows() << " unlabeled rows\n";
    out << "mean training loss: " << format_number(train_loss) << '\n';
    out << "training accuracy: " << fixed(labeled_accuracy(m.params, d)) << '\n';
    if (!fit.meta.converged) out << "warning: optimizer did not converge in " << fit.meta.iterations << " iterations\n";
    out << "wrote " << out_path << '\n';
    return exit_ok;
}

int cmd_predict(const std::string& model_path, const std::string& input, const std::string& label_col,
                const std::string& out_path, std::ostream& out) {
    const auto m = load_model(model_path);
    const std::string text = read_file(input);
    std::ostringstream csv;
    csv << "row,predicted,decision_value\n";
    bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
    if (!blank) {
        const auto table = parse_data_csv(text, label_col, false, m.class_order);
        const auto& d = table.data;
        if (d.rows() > 0) {
            if (d.X.cols() != input_dim(m.params)) {
                throw ShapeError("model expects " + std::to_string(input_dim(m.params)) + " features, input has " +
                                 std::to_string(d.X.cols()));
            }
            const Vector dv = decision_values(m.params, d.X);
            const auto labels = predict(m, d.X);
            for (std::size_t i = 0; i < d.rows(); ++i) {
                csv << i << ',' << csv_field(labels[i]) << ',' << format_number(dv[static_cast<Eigen::Index>(i)]) << '\n';
            }
            if (d.labeled_count() > 0) out << "accuracy on labeled rows: " << fixed(labeled_accuracy(m.params, d)) << '\n';
        }
        out << "predicted " << d.rows() << " rows\n";
    } else {
        out << "predicted 0 rows\n";
    }
    write_file_atomic(out_path, csv.str());
    return exit_ok;
}

int cmd_boundary(const std::string& model_path, const std::string& input, const std::string& label_col, int grid_size,
                 const std::string& out_path, const std::optional<std::string>& svg_path, std::ostream& out) {
    const auto m = load_model(model_path);
    if (input_dim(m.params) != 2) {
        throw ShapeError("boundary needs a model on 2 features, this one has " + std::to_string(input_dim(m.params)));
    }
    const auto table = read_data_file(input, label_col, false, m.class_order);
    const auto& d = table.data;
    if (d.X.cols() != 2) throw ShapeError("boundary needs 2 feature columns, input has " + std::to_string(d.X.cols()));
    if (grid_size < 2) throw ConfigError("--grid must be at least 2");
    const Box box = padded_box(d.X);
    const Grid grid = evaluate_grid(m.params, box, grid_size);
    write_file_atomic(out_path, grid_to_csv(grid));
    const auto contour = zero_contour(grid);
    out << "grid " << grid_size << "x" << grid_size << ", " << contour.size() << " contour segments, wrote " << out_path
        << '\n';
    if (svg_path) {
        ScatterLayer layer;
        layer.data = &d;
        layer.contour = contour;
        layer.title = m.tag;
        write_file_atomic(*svg_path, scatter_svg(layer, box));
        out << "wrote " << *svg_path << '\n';
    }
    return exit_ok;
}

int cmd_learning_curve(const std::string& config_path, const std::optional<std::string>& seed_flag,
                       std::optional<int> jobs, const std::string& out_path, std::ostream& out) {
    json cfg;
    try {
        cfg = json::parse(read_file(config_path));
    } catch (const json::parse_error& e) {
        throw FieldError("", std::string("config is not valid JSON: ") + e.what());
    }
    std::optional<std::uint64_t> seed;
    if (seed_flag) seed = parse_seed(*seed_flag, "--seed");
    const auto c = parse_curve_config(cfg, seed, jobs);
    ExperimentResult all;
    for (std::size_t i = 0; i < c.datasets.size(); ++i) {
        all.append(learning_curve_ssl(c.datasets[i].data, c.plan, c.datasets[i].name, i));
    }
    write_file_atomic(out_path, to_csv(all));
    const auto largest = c.plan.sizes.back();
    for (const auto& ds : c.datasets) {
        ExperimentResult one;
        for (const auto& r : all.records) {
            if (r.dataset == ds.name) one.records.push_back(r);
        }
        for (const auto& cl : c.plan.classifiers) {
            out << ds.name << " " << cl.name << " @" << largest << ":";
            for (const auto& m : c.plan.measures) {
                const auto v = mean_value(one, cl.name, largest, m.name);
                out << ' ' << m.name << '=' << (v ? fixed(*v) : std::string("NA"));
            }
            out << '\n';
        }
    }
    out << all.records.size() << " records, " << all.error_count << " trainer errors, wrote " << out_path << '\n';
    return exit_ok;
}

int cmd_replicate(const std::string& target, const std::string& out_dir, std::optional<int> repeats,
                  const std::optional<std::string>& seed_flag, int jobs, std::ostream& out) {
    ReplicateOptions opt;
    opt.out_dir = out_dir;
    opt.repeats = repeats;
    opt.seed = resolve_seed(seed_flag);
    opt.jobs = jobs;
    const auto s = replicate(target, opt);
    for (const auto& line : s.lines) out << line << '\n';
    for (const auto& f : s.files) out << "wrote " << f.string() << '\n';
    out << "replicate " << target << ": " << (s.pass ? "PASS" : "FAIL") << '\n';
    return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semi-supervised learning experiments"};
    app.name("ssllab");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::optional<std::string> seed;
    std::string output;
    std::string label_col = "Class";
    int jobs = 1;

    // generate
    auto* gen = app.add_subcommand("generate", "Sample a simulated dataset");
    std::string dataset;
    std::optional<double> mar;
    ParamFlags gen_flags;
    std::string names;
    for (const auto& n : dataset_names()) names += (names.empty() ? "" : ", ") + n;
    gen->add_option("--dataset", dataset, "Generator: " + names)->required();
    gen_flags.integer(gen, "--n", "n", "Total points (two-gaussian)");
    gen_flags.integer(gen, "--d", "d", "Dimension (two-gaussian)");
    gen_flags.number(gen, "--variance", "variance", "Cluster variance (two-gaussian)");
    gen_flags.boolean(gen, "--expected", "expected", "Classes follow the clusters (two-gaussian)");
    gen_flags.integer(gen, "--n-per-class", "n_per_class", "Points per class");
    gen_flags.number(gen, "--sigma", "sigma", "Noise standard deviation");
    gen_flags.number(gen, "--turns", "turns", "Spiral turns");
    gen->add_option("--mar", mar, "Remove each label with this probability");
    gen->add_option("--seed", seed, "Seed (default: SSLLAB_SEED, then 1)");
    gen->add_option("--label-col", label_col, "Label column name");
    gen->add_option("-o,--output", output, "Output CSV")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a classifier on a data file");
    std::string model;
    std::string input;
    ParamFlags train_flags;
    std::string models;
    for (const auto& n : model_names()) models += (models.empty() ? "" : ", ") + n;
    train->add_option("--model", model, "Model: " + models)->required();
    train->add_option("--input", input, "Data CSV; empty labels mark unlabeled rows")->required();
    train->add_option("--label-col", label_col, "Label column name");
    train_flags.number(train, "--lambda", "lambda", "Ridge / kernel regularization");
    train_flags.number(train, "--gamma", "gamma", "Laplacian weight");
    train_flags.text(train, "--kernel", "kernel", "linear or rbf");
    train_flags.number(train, "--sigma", "sigma", "rbf kernel: exp(-sigma |x-z|^2)");
    train_flags.number(train, "--C", "C", "SVM cost");
    train_flags.text(train, "--base", "base", "Base learner for self-learning");
    train_flags.integer(train, "--k", "k", "Neighbours in the graph");
    train_flags.number(train, "--graph-sigma", "graph_sigma", "Graph edge bandwidth");
    train_flags.number(train, "--lambda-entropy", "lambda_entropy", "Entropy weight (erlr)");
    train_flags.integer(train, "--max-iter", "max_iter", "Iteration cap");
    train_flags.number(train, "--tol", "tol", "EM tolerance");
    train_flags.number(train, "--reg", "reg", "LDA covariance ridge");
    train->add_option("--param", train_flags.extra, "Extra hyperparameter key=value");
    train->add_option("--seed", seed, "Seed recorded in the model file");
    train->add_option("-o,--output", output, "Output model JSON")->required();

    // predict
    auto* pred = app.add_subcommand("predict", "Predict classes for a data file");
    std::string model_path;
    pred->add_option("--model", model_path, "Model JSON")->required();
    pred->add_option("--input", input, "Data CSV")->required();
    pred->add_option("--label-col", label_col, "Label column name, ignored as a feature when present");
    pred->add_option("-o,--output", output, "Output CSV")->required();

    // boundary
    auto* bound = app.add_subcommand("boundary", "Decision values on a grid over the data");
    int grid = 100;
    std::optional<std::string> svg;
    bound->add_option("--model", model_path, "Model JSON")->required();
    bound->add_option("--input", input, "Data CSV with 2 feature columns")->required();
    bound->add_option("--label-col", label_col, "Label column name");
    bound->add_option("--grid", grid, "Grid points per side")->capture_default_str();
    bound->add_option("-o,--output", output, "Output grid CSV")->required();
    bound->add_option("--svg", svg, "Also draw points and the zero contour");

    // learning-curve
    auto* curve = app.add_subcommand("learning-curve", "Error and loss against unlabeled set size");
    std::string config;
    std::optional<int> curve_jobs;
    curve->add_option("--config", config, "Experiment JSON")->required();
    curve->add_option("--seed", seed, "Base seed (overrides base_seed)");
    curve->add_option("--jobs", curve_jobs, "Worker threads (overrides parallelism)")->check(CLI::PositiveNumber);
    curve->add_option("-o,--output", output, "Output CSV")->required();

    // replicate
    auto* rep = app.add_subcommand("replicate", "Re-run one of the reference experiments");
    std::string target;
    std::string out_dir = ".";
    std::optional<int> repeats;
    rep->add_option("target", target, "fig2, fig3, fig4, fig5 or losses")->required();
    rep->add_option("--out-dir", out_dir, "Directory for CSV and SVG output");
    rep->add_option("--repeats", repeats, "Number of repeats or seeds")->check(CLI::PositiveNumber);
    rep->add_option("--seed", seed, "Base seed (default: SSLLAB_SEED, then 1)");
    rep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*gen) return cmd_generate(dataset, gen_flags, seed, mar, label_col, output, out);
        if (*train) return cmd_train(model, train_flags, input, label_col, seed, output, out);
        if (*pred) return cmd_predict(model_path, input, label_col, output, out);
        if (*bound) return cmd_boundary(model_path, input, label_col, grid, output, svg, out);
        if (*curve) return cmd_learning_curve(config, seed, curve_jobs, output, out);
        if (*rep) return cmd_replicate(target, out_dir, repeats, seed, jobs, out);
    } catch (const FieldError& e) {
        err << "config error at " << (e.pointer.empty() ? "/" : e.pointer) << ": "
            << std::string(e.what()).substr(e.pointer.size() + 2) << '\n';
        return exit_config;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_config;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace ssllab
