#include "ssllab/eval.hpp"

#include "ssllab/io.hpp"
#include "ssllab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

namespace ssllab {

namespace {

bool has_both_classes(const Dataset& d, const std::vector<std::size_t>& rows, std::size_t count, std::size_t min_per_class) {
    std::size_t c[2] = {0, 0};
    for (std::size_t i = 0; i < count; ++i) {
        const auto& l = d.y[rows[i]];
        if (l) ++c[*l];
    }
    return c[0] >= min_per_class && c[1] >= min_per_class;
}

std::vector<int> codes_of(const Dataset& d, const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end) {
    std::vector<int> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) out.push_back(*d.y[rows[i]]);
    return out;
}

Matrix rows_of(const Dataset& d, const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end) {
    return select_rows(d.X, std::span<const std::size_t>(rows.data() + begin, end - begin));
}

void require_fully_labeled(const Dataset& d) {
    d.validate();
    if (d.labeled_count() != d.rows()) throw ArgumentError("dataset must be fully labeled");
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows, bool keep_labels) {
    Dataset out;
    out.X = select_rows(d.X, rows);
    out.class_order = d.class_order;
    out.y.reserve(rows.size());
    for (auto r : rows) out.y.push_back(keep_labels ? d.y[r] : std::nullopt);
    return out;
}

// Records one (classifier, repeat, size) cell for every measure.
struct CellWriter {
    const std::string& dataset;
    int repeat;
    std::vector<ResultRecord>& out;
    std::vector<std::string>& errors;

    void write(const ClassifierEntry& c, std::size_t size, const std::vector<MeasureEntry>& measures,
               const Params* model, const std::string& fail, const EvalContext* ctx) {
        for (const auto& m : measures) {
            ResultRecord r{dataset, c.name, repeat, size, m.name, std::nullopt};
            if (model && ctx) {
                try {
                    const double v = m.fn(*ctx);
                    if (std::isfinite(v)) {
                        r.value = v;
                    } else {
                        errors.push_back(c.name + " repeat " + std::to_string(repeat) + ": non-finite " + m.name);
                    }
                } catch (const std::exception& e) {
                    errors.push_back(c.name + " repeat " + std::to_string(repeat) + " measure " + m.name + ": " + e.what());
                }
            }
            out.push_back(std::move(r));
        }
        if (!model) errors.push_back(c.name + " repeat " + std::to_string(repeat) + " size " + std::to_string(size) + ": " + fail);
    }
};

std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

ExperimentResult merge(std::vector<std::vector<ResultRecord>>& parts, std::vector<std::vector<std::string>>& errors) {
    ExperimentResult r;
    for (auto& p : parts) r.records.insert(r.records.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    for (auto& e : errors) {
        r.error_count += e.size();
        r.errors.insert(r.errors.end(), e.begin(), e.end());
    }
    return r;
}

// Orders records by (classifier, repeat, size, measure) in plan order.
void canonical_sort(ExperimentResult& r, const std::vector<ClassifierEntry>& classifiers,
                    const std::vector<MeasureEntry>& measures) {
    auto rank = [](const auto& list, const std::string& name) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].name == name) return i;
        }
        return list.size();
    };
    std::stable_sort(r.records.begin(), r.records.end(), [&](const ResultRecord& a, const ResultRecord& b) {
        const auto ka = std::make_tuple(rank(classifiers, a.classifier), a.repeat, a.size, rank(measures, a.measure));
        const auto kb = std::make_tuple(rank(classifiers, b.classifier), b.repeat, b.size, rank(measures, b.measure));
        return ka < kb;
    });
}

}  // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

void ExperimentResult::append(const ExperimentResult& other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
    error_count += other.error_count;
    errors.insert(errors.end(), other.errors.begin(), other.errors.end());
}

Dataset add_missing_labels_mar(const Dataset& d, double prob, std::uint64_t seed) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw ArgumentError("prob must lie in [0,1]");
    require_fully_labeled(d);
    Rng rng(seed);
    Dataset out = d;
    for (auto& l : out.y) {
        if (rng.uniform() < prob) l.reset();
    }
    return out;
}

std::vector<int> true_labels(const Dataset& d_missing, const Dataset& d_original) {
    if (d_missing.rows() != d_original.rows() || d_missing.X.cols() != d_original.X.cols()) {
        throw ProvenanceError("datasets have different shapes");
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < d_missing.rows(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        if (d_missing.X.row(r) != d_original.X.row(r)) throw ProvenanceError("feature mismatch at row " + std::to_string(i));
        if (!d_missing.y[i]) {
            if (!d_original.y[i]) throw ProvenanceError("original label missing at row " + std::to_string(i));
            out.push_back(*d_original.y[i]);
        }
    }
    return out;
}

SslSplit split_dataset_ssl(const Dataset& d, std::size_t n_l, std::size_t n_u, std::size_t n_test,
                           std::size_t min_per_class, std::uint64_t seed) {
    require_fully_labeled(d);
    if (n_l + n_u + n_test > d.rows()) throw InfeasibleError("requested split sizes exceed the row count");
    if (2 * min_per_class > n_l) throw InfeasibleError("labeled set too small for min_per_class");
    Rng rng(seed);
    std::vector<std::size_t> perm;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        perm = rng.permutation(d.rows());
        ok = has_both_classes(d, perm, n_l, min_per_class);
    }
    if (!ok) throw InfeasibleError("could not draw a labeled set with min_per_class per class in 1000 attempts");
    SslSplit s;
    s.labeled_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_l));
    s.unlabeled_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_l),
                            perm.begin() + static_cast<std::ptrdiff_t>(n_l + n_u));
    s.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_l + n_u),
                       perm.begin() + static_cast<std::ptrdiff_t>(n_l + n_u + n_test));
    s.labeled = subset(d, s.labeled_rows, true);
    s.unlabeled = subset(d, s.unlabeled_rows, false);
    s.test = subset(d, s.test_rows, true);
    for (auto r : s.unlabeled_rows) s.unlabeled_truth.push_back(*d.y[r]);
    return s;
}

double measure_error(const Params& m, const Matrix& X_test, Labels y_test) {
    if (X_test.rows() == 0) throw ArgumentError("empty evaluation set");
    const auto pred = predict_codes(m, X_test);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != y_test[i];
    return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

double measure_loss_test(const Params& m, const Matrix& X_test, Labels y_test) {
    if (X_test.rows() == 0) throw ArgumentError("empty evaluation set");
    return mean_loss(m, X_test, y_test);
}

double measure_loss_all(const Params& m, const Dataset& d_missing, const Dataset& d_original) {
    const auto hidden = true_labels(d_missing, d_original);
    std::vector<int> y;
    y.reserve(d_original.rows());
    std::size_t k = 0;
    for (std::size_t i = 0; i < d_missing.rows(); ++i) y.push_back(d_missing.y[i] ? *d_missing.y[i] : hidden[k++]);
    return measure_loss_test(m, d_original.X, y);
}

MeasureEntry named_measure(const std::string& name) {
    if (name == "error") return {name, [](const EvalContext& c) { return measure_error(c.model, c.X_test, c.y_test); }};
    if (name == "loss_test") {
        return {name, [](const EvalContext& c) { return measure_loss_test(c.model, c.X_test, c.y_test); }};
    }
    if (name == "loss_train") {
        return {name, [](const EvalContext& c) { return measure_loss_test(c.model, c.X_train, c.y_train); }};
    }
    throw ConfigError("unknown measure " + name);
}

std::vector<std::string> measure_names() { return {"error", "loss_test", "loss_train"}; }

ExperimentResult learning_curve_ssl(const Dataset& d, const TrialPlan& plan, const std::string& dataset_name,
                                    std::size_t dataset_index) {
    require_fully_labeled(d);
    if (plan.repeats < 1) throw ArgumentError("repeats must be positive");
    if (plan.n_l < 2) throw ArgumentError("n_l must be at least 2");
    if (plan.sizes.empty()) throw ArgumentError("sizes must not be empty");
    for (std::size_t i = 0; i < plan.sizes.size(); ++i) {
        if (plan.sizes[i] < 1 || (i > 0 && plan.sizes[i] <= plan.sizes[i - 1])) {
            throw ArgumentError("sizes must be positive and strictly increasing");
        }
    }
    const std::size_t pool = plan.sizes.back();
    if (plan.n_l + pool > d.rows()) throw InfeasibleError("n_l + max(sizes) exceeds the row count");

    const auto R = static_cast<std::size_t>(plan.repeats);
    std::vector<std::vector<ResultRecord>> parts(R);
    std::vector<std::vector<std::string>> errors(R);
    parallel_for(R, plan.jobs, [&](std::size_t r) {
        const int rep = static_cast<int>(r);
        auto& out = parts[r];
        auto& errs = errors[r];
        CellWriter writer{dataset_name, rep, out, errs};
        const std::uint64_t seed = derive_seed(plan.base_seed, {dataset_index, r});
        Rng rng(seed);
        std::vector<std::size_t> perm;
        bool ok = false;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
            perm = rng.permutation(d.rows());
            ok = has_both_classes(d, perm, plan.n_l, 1);
        }
        if (!ok) {
            for (const auto& c : plan.classifiers) {
                for (auto s : plan.sizes) writer.write(c, s, plan.measures, nullptr, "no labeled draw with both classes", nullptr);
            }
            return;
        }
        const std::size_t nl = plan.n_l;
        const Matrix Xl = rows_of(d, perm, 0, nl);
        const auto yl = codes_of(d, perm, 0, nl);
        const Matrix Xtest = rows_of(d, perm, nl + pool, d.rows());
        const auto ytest = codes_of(d, perm, nl + pool, d.rows());
        for (const auto& c : plan.classifiers) {
            std::optional<Fit> once;
            std::string once_error;
            if (!c.uses_unlabeled) {
                try {
                    once = c.train(Xl, yl, Matrix(0, d.X.cols()));
                } catch (const std::exception& e) {
                    once_error = e.what();
                }
            }
            for (auto s : plan.sizes) {
                const Matrix Xu = rows_of(d, perm, nl, nl + s);
                const Matrix Xtrain = stack_rows(Xl, Xu);
                const auto ytrain = concat(yl, codes_of(d, perm, nl, nl + s));
                std::optional<Fit> fit;
                std::string fail = once_error;
                if (c.uses_unlabeled) {
                    try {
                        fit = c.train(Xl, yl, Xu);
                    } catch (const std::exception& e) {
                        fail = e.what();
                    }
                } else {
                    fit = once;
                }
                if (fit) {
                    const EvalContext ctx{fit->params, Xtest, ytest, Xtrain, ytrain};
                    writer.write(c, s, plan.measures, &fit->params, "", &ctx);
                } else {
                    writer.write(c, s, plan.measures, nullptr, fail, nullptr);
                }
            }
        }
    });
    auto result = merge(parts, errors);
    canonical_sort(result, plan.classifiers, plan.measures);
    return result;
}

ExperimentResult cross_validation_ssl(const Dataset& d, const CrossValidationPlan& plan, const std::string& dataset_name,
                                      std::size_t dataset_index) {
    require_fully_labeled(d);
    const std::size_t n = d.rows();
    if (plan.k_folds < 2 || static_cast<std::size_t>(plan.k_folds) > n) throw ArgumentError("k_folds must lie in [2, n]");
    if (plan.repeats < 1) throw ArgumentError("repeats must be positive");
    const auto k = static_cast<std::size_t>(plan.k_folds);
    const std::size_t largest_fold = (n + k - 1) / k;
    if (plan.n_labeled + 1 > n - largest_fold) throw InfeasibleError("n_labeled must be at most training-fold size - 1");
    if (plan.n_labeled < 2) throw InfeasibleError("n_labeled must be at least 2");

    const auto R = static_cast<std::size_t>(plan.repeats);
    std::vector<std::vector<ResultRecord>> parts(R);
    std::vector<std::vector<std::string>> errors(R);
    parallel_for(R, plan.jobs, [&](std::size_t r) {
        const int rep = static_cast<int>(r);
        CellWriter writer{dataset_name, rep, parts[r], errors[r]};
        Rng rng(derive_seed(plan.seed, {dataset_index, r}));
        const auto perm = rng.permutation(n);
        std::vector<std::size_t> bounds{0};
        for (std::size_t f = 0; f < k; ++f) bounds.push_back(bounds.back() + n / k + (f < n % k ? 1 : 0));
        for (std::size_t f = 0; f < k; ++f) {
            std::vector<std::size_t> held(perm.begin() + static_cast<std::ptrdiff_t>(bounds[f]),
                                          perm.begin() + static_cast<std::ptrdiff_t>(bounds[f + 1]));
            std::vector<std::size_t> train;
            for (std::size_t i = 0; i < n; ++i) {
                if (i < bounds[f] || i >= bounds[f + 1]) train.push_back(perm[i]);
            }
            bool ok = false;
            for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
                rng.shuffle(train);
                ok = has_both_classes(d, train, plan.n_labeled, 1);
            }
            if (!ok) {
                for (const auto& c : plan.classifiers) writer.write(c, f, plan.measures, nullptr, "no labeled draw with both classes", nullptr);
                continue;
            }
            const Matrix Xl = rows_of(d, train, 0, plan.n_labeled);
            const auto yl = codes_of(d, train, 0, plan.n_labeled);
            const Matrix Xu = rows_of(d, train, plan.n_labeled, train.size());
            const Matrix Xtrain = rows_of(d, train, 0, train.size());
            const auto ytrain = codes_of(d, train, 0, train.size());
            const Matrix Xtest = rows_of(d, held, 0, held.size());
            const auto ytest = codes_of(d, held, 0, held.size());
            for (const auto& c : plan.classifiers) {
                try {
                    const Fit fit = c.train(Xl, yl, c.uses_unlabeled ? Xu : Matrix(0, d.X.cols()));
                    const EvalContext ctx{fit.params, Xtest, ytest, Xtrain, ytrain};
                    writer.write(c, f, plan.measures, &fit.params, "", &ctx);
                } catch (const std::exception& e) {
                    writer.write(c, f, plan.measures, nullptr, e.what(), nullptr);
                }
            }
        }
    });
    auto result = merge(parts, errors);
    canonical_sort(result, plan.classifiers, plan.measures);
    return result;
}

std::optional<double> mean_value(const ExperimentResult& r, const std::string& classifier, std::size_t size,
                                 const std::string& measure) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& rec : r.records) {
        if (rec.classifier == classifier && rec.size == size && rec.measure == measure && rec.value) {
            sum += *rec.value;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::string to_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "dataset,classifier,repeat,size,measure,value\n";
    for (const auto& rec : r.records) {
        out << csv_field(rec.dataset) << ',' << csv_field(rec.classifier) << ',' << rec.repeat << ',' << rec.size << ','
            << csv_field(rec.measure) << ',';
        if (rec.value) out << format_number(*rec.value);
        out << '\n';
    }
    return out.str();
}

}  // namespace ssllab
