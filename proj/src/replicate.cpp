#include "ssllab/replicate.hpp"

#include "ssllab/datagen.hpp"
#include "ssllab/graph.hpp"
#include "ssllab/io.hpp"
#include "ssllab/plot.hpp"
#include "ssllab/registry.hpp"
#include "ssllab/rng.hpp"
#include "ssllab/semi.hpp"
#include "ssllab/supervised.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace ssllab {

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

void emit(ReplicateSummary& s, const ReplicateOptions& opt, const std::string& name, const std::string& content) {
    const auto path = opt.out_dir / name;
    write_file_atomic(path, content);
    s.files.push_back(path);
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return a.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(a.size());
}

// One labeled row per class, chosen by the given score (lowest wins), rest unlabeled.
Dataset keep_one_per_class(const Dataset& d, const std::vector<double>& score) {
    Dataset out = d;
    std::array<std::optional<std::size_t>, 2> best;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        const auto c = static_cast<std::size_t>(*d.y[i]);
        if (!best[c] || score[i] < score[*best[c]]) best[c] = i;
    }
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (i != best[0] && i != best[1]) out.y[i].reset();
    }
    return out;
}

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> s(n);
    for (auto& v : s) v = rng.uniform();
    return s;
}

std::vector<int> codes(const Dataset& d) {
    std::vector<int> out;
    for (const auto& l : d.y) out.push_back(*l);
    return out;
}

HarmonicTrial harmonic_trial(const Dataset& full, const Dataset& partial) {
    GraphConfig cfg;
    cfg.adjacency = GraphConfig::Adjacency::knn;
    cfg.k = 10;
    const Graph g = build_graph(full.X, cfg);
    const auto split = split_labeled_unlabeled(partial);
    Vector fl(static_cast<Eigen::Index>(split.yl.size()));
    for (std::size_t i = 0; i < split.yl.size(); ++i) fl[static_cast<Eigen::Index>(i)] = split.yl[i];
    const Vector fu = harmonic_energy_min(g, split.labeled_rows, fl, split.unlabeled_rows);

    HarmonicTrial t;
    t.data = partial;
    t.truth = codes(full);
    t.predicted = t.truth;
    std::vector<int> pu, tu;
    for (std::size_t k = 0; k < split.unlabeled_rows.size(); ++k) {
        const int p = fu[static_cast<Eigen::Index>(k)] > 0.5 ? 1 : 0;
        t.predicted[split.unlabeled_rows[k]] = p;
        pu.push_back(p);
        tu.push_back(t.truth[split.unlabeled_rows[k]]);
    }
    t.accuracy = accuracy(pu, tu);
    return t;
}

double transductive_accuracy(const Params& m, const Matrix& Xu, const std::vector<int>& truth) {
    return accuracy(predict_codes(m, Xu), truth);
}

std::string boundary_svg(const Dataset& d, const Params& m, const std::string& title,
                         const std::vector<std::vector<Segment>>& extra = {}) {
    const Box box = padded_box(d.X);
    ScatterLayer layer;
    layer.data = &d;
    layer.contour = zero_contour(evaluate_grid(m, box, 100));
    layer.extra_contours = extra;
    layer.title = title;
    return scatter_svg(layer, box);
}

int repeats_or(const ReplicateOptions& opt, int fallback) {
    const int r = opt.repeats.value_or(fallback);
    if (r < 1) throw ConfigError("--repeats must be positive");
    return r;
}

ReplicateSummary run_fig2(const ReplicateOptions& opt) {
    ReplicateSummary s;
    const int repeats = repeats_or(opt, 20);
    const auto plan = gaussian_curve_plan(repeats, opt.seed, opt.jobs);
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult all;
    const std::array<std::pair<const char*, bool>, 2> sets{{{"expected", true}, {"non-expected", false}}};
    std::array<double, 2> gain{};
    double nonexp_sl_small = 0.0;
    double nonexp_sl_large = 0.0;
    bool missing = false;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const auto d = gaussian_curve_data(sets[k].second, opt.seed);
        const auto r = learning_curve_ssl(d, plan, sets[k].first, k);
        all.append(r);
        const auto sup = mean_value(r, "supervised", 1024, "error");
        const auto sl = mean_value(r, "self-learning", 1024, "error");
        const auto sl2 = mean_value(r, "self-learning", 2, "error");
        if (!sup || !sl || !sl2) {
            missing = true;
            continue;
        }
        gain[k] = *sup - *sl;
        if (!sets[k].second) {
            nonexp_sl_small = *sl2;
            nonexp_sl_large = *sl;
        }
        s.lines.push_back(std::string(sets[k].first) + ": error@1024 supervised " + fixed(*sup) + ", self-learning " +
                          fixed(*sl) + " (self-learning error@2 " + fixed(*sl2) + ")");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(s, opt, "fig2_learning_curves.csv", to_csv(all));
    emit(s, opt, "fig2_expected.svg", learning_curve_svg(all, "expected", "error", "expected Gaussian: test error"));
    emit(s, opt, "fig2_nonexpected.svg",
         learning_curve_svg(all, "non-expected", "error", "non-expected Gaussian: test error"));
    const bool left = !missing && gain[0] >= 0.005;
    const bool right = !missing && -gain[1] >= 0.01 && nonexp_sl_large > nonexp_sl_small;
    s.lines.push_back("repeats " + std::to_string(repeats) + ", " + fixed(secs, 1) + " s, " +
                      std::to_string(all.error_count) + " trainer errors");
    s.lines.push_back("expected: self-learning beats supervised by >= 0.005: " + verdict(left));
    s.lines.push_back("non-expected: self-learning worse than supervised by >= 0.01 and than itself at size 2: " +
                      verdict(right));
    s.pass = left && right;
    return s;
}

ReplicateSummary run_losses(const ReplicateOptions& opt) {
    ReplicateSummary s;
    const int repeats = repeats_or(opt, 100);
    std::vector<LossTrial> trials(static_cast<std::size_t>(repeats));
    std::vector<std::string> failures(trials.size());
    parallel_for(trials.size(), opt.jobs, [&](std::size_t i) {
        try {
            trials[i] = loss_trial(derive_seed(opt.seed, {i}));
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });
    std::ostringstream csv;
    csv << "trial,labeled,supervised,self_learning,icls,icls_projection\n";
    int proj_ok = 0, icls_ok = 0, sl_worse = 0, failed = 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (!failures[i].empty()) {
            ++failed;
            s.lines.push_back("trial " + std::to_string(i) + " failed: " + failures[i]);
            continue;
        }
        const auto& t = trials[i];
        csv << i << ',' << t.labeled << ',' << format_number(t.supervised) << ',' << format_number(t.self_learning)
            << ',' << format_number(t.icls) << ',' << format_number(t.icls_projection) << '\n';
        proj_ok += t.icls_projection <= t.supervised + 1e-9;
        icls_ok += t.icls <= t.supervised + 1e-9;
        sl_worse += t.self_learning > t.supervised;
    }
    emit(s, opt, "losses.csv", csv.str());
    if (failures[0].empty()) {
        const auto& t = trials[0];
        s.lines.push_back("first trial (" + std::to_string(t.labeled) + " labels), mean all-data squared loss:");
        s.lines.push_back("  supervised       " + fixed(t.supervised, 7));
        s.lines.push_back("  self-learning    " + fixed(t.self_learning, 7));
        s.lines.push_back("  icls             " + fixed(t.icls, 7));
        s.lines.push_back("  icls-projection  " + fixed(t.icls_projection, 7));
    }
    const int n = repeats;
    const bool a = failed == 0 && proj_ok == n;
    const bool b = failed == 0 && 100 * icls_ok >= 95 * n;
    const bool c = failed == 0 && 100 * sl_worse >= 90 * n;
    s.lines.push_back("icls-projection <= supervised: " + std::to_string(proj_ok) + "/" + std::to_string(n) + " " + verdict(a));
    s.lines.push_back("icls <= supervised: " + std::to_string(icls_ok) + "/" + std::to_string(n) + " " + verdict(b));
    s.lines.push_back("self-learning > supervised: " + std::to_string(sl_worse) + "/" + std::to_string(n) + " " + verdict(c));
    s.pass = a && b && c;
    return s;
}

ReplicateSummary run_fig3(const ReplicateOptions& opt) {
    ReplicateSummary s;
    const int repeats = repeats_or(opt, 10);
    std::ostringstream csv;
    csv << "dataset,trial,row,x1,x2,truth,predicted,labeled\n";
    bool pass = true;
    const std::array<std::pair<const char*, double>, 2> sets{{{"parallel-planes", 0.99}, {"spirals", 0.95}}};
    for (std::size_t k = 0; k < sets.size(); ++k) {
        int good = 0;
        std::string acc_list;
        for (int t = 0; t < repeats; ++t) {
            const auto seed = derive_seed(opt.seed, {k, static_cast<std::uint64_t>(t)});
            HarmonicTrial h;
            try {
                h = k == 0 ? harmonic_planes_trial(seed) : harmonic_spirals_trial(seed);
            } catch (const ConnectivityError& e) {
                acc_list += " err";
                s.lines.push_back(std::string(sets[k].first) + " trial " + std::to_string(t) + ": " + e.what());
                continue;
            }
            good += h.accuracy >= sets[k].second;
            acc_list += " " + fixed(h.accuracy, 3);
            for (std::size_t i = 0; i < h.data.rows(); ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                csv << sets[k].first << ',' << t << ',' << i << ',' << format_number(h.data.X(r, 0)) << ','
                    << format_number(h.data.X(r, 1)) << ',' << h.data.class_order[static_cast<std::size_t>(h.truth[i])]
                    << ',' << h.data.class_order[static_cast<std::size_t>(h.predicted[i])] << ','
                    << (h.data.y[i] ? 1 : 0) << '\n';
            }
            if (t == 0) {
                Dataset shown = h.data;
                for (std::size_t i = 0; i < shown.rows(); ++i) shown.y[i] = h.predicted[i];
                ScatterLayer layer;
                layer.data = &shown;
                layer.title = std::string(sets[k].first) + ": harmonic labels, accuracy " + fixed(h.accuracy, 3);
                emit(s, opt, std::string("fig3_") + sets[k].first + ".svg", scatter_svg(layer, padded_box(shown.X)));
            }
        }
        const bool ok = 10 * good >= 8 * repeats;
        pass = pass && ok;
        s.lines.push_back(std::string(sets[k].first) + " accuracy:" + acc_list);
        s.lines.push_back(std::string(sets[k].first) + ": >= " + fixed(sets[k].second, 2) + " on " +
                          std::to_string(good) + "/" + std::to_string(repeats) + " " + verdict(ok));
    }
    emit(s, opt, "fig3_predictions.csv", csv.str());
    s.pass = pass;
    return s;
}

ReplicateSummary run_fig4(const ReplicateOptions& opt) {
    ReplicateSummary s;
    const int repeats = repeats_or(opt, 10);
    std::vector<MoonTrial> trials(static_cast<std::size_t>(repeats));
    parallel_for(trials.size(), opt.jobs, [&](std::size_t i) {
        trials[i] = moon_trial(derive_seed(opt.seed, {i}));
    });
    const auto& first = trials[0];
    emit(s, opt, "fig4_svm.svg",
         boundary_svg(first.data, first.svm, "supervised SVM C=2500, accuracy " + fixed(first.svm_accuracy, 3)));
    emit(s, opt, "fig4_lapsvm_gamma10.svg",
         boundary_svg(first.data, first.lapsvm_low, "LapSVM gamma=10, accuracy " + fixed(first.lapsvm_low_accuracy, 3)));
    emit(s, opt, "fig4_lapsvm_gamma10000.svg",
         boundary_svg(first.data, first.lapsvm, "LapSVM gamma=10000, accuracy " + fixed(first.lapsvm_accuracy, 3)));
    int svm_bad = 0, lap_good = 0;
    std::ostringstream csv;
    csv << "trial,svm,lapsvm_gamma10,lapsvm_gamma10000\n";
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        svm_bad += t.svm_accuracy <= 0.9;
        lap_good += t.lapsvm_accuracy >= 0.95;
        csv << i << ',' << format_number(t.svm_accuracy) << ',' << format_number(t.lapsvm_low_accuracy) << ','
            << format_number(t.lapsvm_accuracy) << '\n';
    }
    emit(s, opt, "fig4_accuracy.csv", csv.str());
    s.lines.push_back("first trial transductive accuracy: svm " + fixed(first.svm_accuracy, 3) + ", lapsvm gamma=10 " +
                      fixed(first.lapsvm_low_accuracy, 3) + ", lapsvm gamma=10000 " + fixed(first.lapsvm_accuracy, 3));
    const bool a = 10 * svm_bad >= 5 * repeats;
    const bool b = 10 * lap_good >= 8 * repeats;
    s.lines.push_back("svm misclassifies >= 10%: " + std::to_string(svm_bad) + "/" + std::to_string(repeats) + " " + verdict(a));
    s.lines.push_back("lapsvm gamma=10000 >= 0.95: " + std::to_string(lap_good) + "/" + std::to_string(repeats) + " " + verdict(b));
    s.pass = a && b;
    return s;
}

ReplicateSummary run_fig5(const ReplicateOptions& opt) {
    ReplicateSummary s;
    s.lines.push_back("datasets: expected Gaussian (boundary in the low-density gap) and non-expected Gaussian "
                      "(boundary crosses both clusters), as stand-ins for the unspecified originals");
    std::array<double, 2> lr_err{}, er_err{};
    const std::array<std::pair<const char*, bool>, 2> sets{{{"low-density", true}, {"non-low-density", false}}};
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const auto d = generate_two_class_gaussian(400, 2, 1.0, sets[k].second, derive_seed(opt.seed, {k, 0}));
        const auto sp = split_dataset_ssl(d, 10, 200, 190, 1, derive_seed(opt.seed, {k, 1}));
        const auto lab = split_labeled_unlabeled(sp.labeled);
        const auto test = split_labeled_unlabeled(sp.test);
        const Fit lr = train_logistic(lab.Xl, lab.yl, 1e-3);
        const Fit er = train_erlr(lab.Xl, lab.yl, sp.unlabeled.X, 1.0, 1e-3);
        lr_err[k] = measure_error(lr.params, test.Xl, test.yl);
        er_err[k] = measure_error(er.params, test.Xl, test.yl);
        Dataset shown = sp.labeled;
        shown.X = stack_rows(sp.labeled.X, sp.unlabeled.X);
        shown.y.resize(shown.rows());
        const Box box = padded_box(shown.X);
        ScatterLayer layer;
        layer.data = &shown;
        layer.contour = zero_contour(evaluate_grid(er.params, box, 100));
        layer.extra_contours.push_back(zero_contour(evaluate_grid(lr.params, box, 100)));
        layer.title = std::string(sets[k].first) + ": ERLR (solid) vs LR (dashed)";
        emit(s, opt, std::string("fig5_") + sets[k].first + ".svg", scatter_svg(layer, box));
        s.lines.push_back(std::string(sets[k].first) + ": test error LR " + fixed(lr_err[k]) + ", ERLR " + fixed(er_err[k]));
    }
    const bool ok = er_err[0] <= lr_err[0] + 0.02 && er_err[1] > lr_err[1];
    s.lines.push_back("ERLR no worse with the assumption and worse without it: " + verdict(ok));
    s.pass = ok;
    return s;
}

}  // namespace

TrialPlan gaussian_curve_plan(int repeats, std::uint64_t seed, int jobs) {
    TrialPlan plan;
    plan.base_seed = seed;
    plan.repeats = repeats;
    plan.n_l = 10;
    for (std::size_t s = 2; s <= 1024; s *= 2) plan.sizes.push_back(s);
    plan.measures = {named_measure("error"), named_measure("loss_test")};
    auto sup = make_classifier("ls", nlohmann::json::object());
    sup.name = "supervised";
    auto sl = make_classifier("self-learning", nlohmann::json{{"base", "ls"}});
    sl.name = "self-learning";
    plan.classifiers = {sup, sl};
    plan.jobs = jobs;
    return plan;
}

Dataset gaussian_curve_data(bool expected, std::uint64_t seed) {
    return generate_two_class_gaussian(2000, 2, 1.0, expected, derive_seed(seed, {expected ? 1u : 2u}));
}

LossTrial loss_trial(std::uint64_t seed) {
    const Dataset d = generate_two_class_gaussian(1000, 2, 1.0, false, derive_seed(seed, {0}));
    Dataset m;
    bool ok = false;
    for (std::uint64_t a = 0; a < 1000 && !ok; ++a) {
        m = add_missing_labels_mar(d, 0.995, derive_seed(seed, {1, a}));
        std::array<int, 2> c{};
        for (const auto& l : m.y) {
            if (l) ++c[static_cast<std::size_t>(*l)];
        }
        ok = c[0] > 0 && c[1] > 0;
    }
    if (!ok) throw InfeasibleError("no draw kept a label of each class");
    const auto sp = split_labeled_unlabeled(m);
    LossTrial t;
    t.labeled = sp.yl.size();
    const auto sup = train_least_squares(sp.Xl, sp.yl, 0.0);
    const SupervisedTrainer base = [](const Matrix& X, Labels y) { return train_least_squares(X, y, 0.0); };
    const auto sl = self_learning(base, sp.Xl, sp.yl, sp.Xu);
    const auto ic = train_icls(sp.Xl, sp.yl, sp.Xu, 0.0);
    const auto ip = train_icls_projection(sp.Xl, sp.yl, sp.Xu, 0.0);
    t.supervised = measure_loss_all(sup.params, m, d);
    t.self_learning = measure_loss_all(sl.params, m, d);
    t.icls = measure_loss_all(ic.params, m, d);
    t.icls_projection = measure_loss_all(ip.params, m, d);
    return t;
}

HarmonicTrial harmonic_planes_trial(std::uint64_t seed) {
    const Dataset d = generate_parallel_planes(100, 0.1, derive_seed(seed, {0}));
    return harmonic_trial(d, keep_one_per_class(d, random_scores(d.rows(), derive_seed(seed, {1}))));
}

HarmonicTrial harmonic_spirals_trial(std::uint64_t seed) {
    const Dataset d = generate_spirals(100, 0.025, 1.0, derive_seed(seed, {0}));
    std::vector<double> radius(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) radius[i] = d.X.row(static_cast<Eigen::Index>(i)).norm();
    return harmonic_trial(d, keep_one_per_class(d, radius));
}

MoonTrial moon_trial(std::uint64_t seed) {
    const Dataset d = generate_crescent_moon(100, 0.3, derive_seed(seed, {0}));
    MoonTrial t;
    t.data = keep_one_per_class(d, random_scores(d.rows(), derive_seed(seed, {1})));
    const auto sp = split_labeled_unlabeled(t.data);
    for (auto r : sp.unlabeled_rows) t.unlabeled_truth.push_back(*d.y[r]);
    const auto kernel = KernelSpec::rbf(0.05);
    GraphConfig graph;
    graph.k = 6;
    graph.weight_sigma = 0.05;
    t.svm = train_svm(sp.Xl, sp.yl, kernel, 2500.0).params;
    LapParams low{1e-4, 10.0};
    LapParams high{1e-4, 10000.0};
    t.lapsvm_low = train_laplacian_svm(sp.Xl, sp.yl, sp.Xu, kernel, low, graph).params;
    t.lapsvm = train_laplacian_svm(sp.Xl, sp.yl, sp.Xu, kernel, high, graph).params;
    t.svm_accuracy = transductive_accuracy(t.svm, sp.Xu, t.unlabeled_truth);
    t.lapsvm_low_accuracy = transductive_accuracy(t.lapsvm_low, sp.Xu, t.unlabeled_truth);
    t.lapsvm_accuracy = transductive_accuracy(t.lapsvm, sp.Xu, t.unlabeled_truth);
    return t;
}

std::vector<std::string> replicate_targets() { return {"fig2", "fig3", "fig4", "fig5", "losses"}; }

ReplicateSummary replicate(const std::string& target, const ReplicateOptions& opt) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) throw ConfigError("cannot create " + opt.out_dir.string() + ": " + ec.message());
    if (target == "fig2") return run_fig2(opt);
    if (target == "fig3") return run_fig3(opt);
    if (target == "fig4") return run_fig4(opt);
    if (target == "fig5") return run_fig5(opt);
    if (target == "losses") return run_losses(opt);
    throw ConfigError("unknown target '" + target + "' (valid: fig2, fig3, fig4, fig5, losses)");
}

}  // namespace ssllab
