#include "ssllab/registry.hpp"

#include "ssllab/datagen.hpp"
#include "ssllab/semi.hpp"
#include "ssllab/supervised.hpp"

#include <algorithm>
#include <set>

namespace ssllab {

namespace {

using nlohmann::json;

class Reader {
public:
    Reader(const json& obj, std::string pointer) : obj_(obj), ptr_(std::move(pointer)) {
        if (!obj_.is_null() && !obj_.is_object()) throw FieldError(ptr_, "expected an object");
    }

    bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }
    std::string at(const std::string& key) const { return ptr_ + "/" + key; }

    double number(const std::string& key, double fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_number()) throw FieldError(at(key), "expected a number");
        return v.get<double>();
    }

    double nonneg(const std::string& key, double fallback) {
        const double v = number(key, fallback);
        if (!(v >= 0.0)) throw FieldError(at(key), "must be >= 0");
        return v;
    }

    double positive(const std::string& key, double fallback) {
        const double v = number(key, fallback);
        if (!(v > 0.0)) throw FieldError(at(key), "must be > 0");
        return v;
    }

    long long integer(const std::string& key, long long fallback, long long min) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_number_integer()) throw FieldError(at(key), "expected an integer");
        const auto i = v.get<long long>();
        if (i < min) throw FieldError(at(key), "must be >= " + std::to_string(min));
        return i;
    }

    bool boolean(const std::string& key, bool fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) throw FieldError(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_string()) throw FieldError(at(key), "expected a string");
        auto s = v.get<std::string>();
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw FieldError(at(key), "unknown value '" + s + "' (expected one of: " + list + ")");
        }
        return s;
    }

    void skip(const std::string& key) { used_.insert(key); }

    // Everything not consumed, for forwarding.
    json rest() const {
        json out = json::object();
        if (obj_.is_object()) {
            for (const auto& [k, v] : obj_.items()) {
                if (!used_.count(k)) out[k] = v;
            }
        }
        return out;
    }

    void finish() const {
        if (!obj_.is_object()) return;
        for (const auto& [k, v] : obj_.items()) {
            if (!used_.count(k)) throw FieldError(at(k), "unknown parameter");
        }
    }

private:
    const json& obj_;
    std::string ptr_;
    std::set<std::string> used_;
};

KernelSpec read_kernel(Reader& r, const std::string& fallback) {
    const auto family = r.text("kernel", fallback, {"linear", "rbf"});
    if (family == "linear") {
        r.skip("sigma");
        if (r.has("sigma")) throw FieldError(r.at("sigma"), "sigma applies to the rbf kernel only");
        return KernelSpec::linear();
    }
    return KernelSpec::rbf(r.positive("sigma", 1.0));
}

GraphConfig read_graph(Reader& r, const KernelSpec& kernel) {
    GraphConfig g;
    const auto adj = r.text("adjacency", "knn", {"knn", "full"});
    g.adjacency = adj == "knn" ? GraphConfig::Adjacency::knn : GraphConfig::Adjacency::full_rbf;
    g.k = static_cast<int>(r.integer("k", 6, 1));
    if (r.has("graph_sigma")) {
        g.weight_sigma = r.positive("graph_sigma", 1.0);
    } else {
        r.skip("graph_sigma");
        if (kernel.family == KernelSpec::Family::rbf) g.weight_sigma = kernel.sigma;
    }
    g.normalized_laplacian = r.boolean("normalized", false);
    return g;
}

Matrix no_rows(const Matrix& like) { return Matrix(0, like.cols()); }

const std::vector<std::string> supervised_models{"ls", "kls", "nmc", "lda", "logistic", "svm"};

}  // namespace

std::vector<std::string> model_names() {
    return {"ls",  "kls",   "nmc",  "lda",  "logistic",        "svm",  "self-learning", "em-nmc",
            "em-lda", "mc-nmc", "usm", "icls", "icls-projection", "erlr", "laprls",        "lapsvm"};
}

bool is_semi_supervised(const std::string& model) {
    return std::find(supervised_models.begin(), supervised_models.end(), model) == supervised_models.end();
}

ClassifierEntry make_classifier(const std::string& model, const json& params, const std::string& pointer) {
    Reader r(params, pointer);
    ClassifierEntry e;
    e.name = model;
    e.uses_unlabeled = is_semi_supervised(model);

    if (model == "ls") {
        const double lambda = r.nonneg("lambda", 0.0);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix&) { return train_least_squares(Xl, yl, lambda); };
    } else if (model == "kls") {
        const double lambda = r.nonneg("lambda", 1e-4);
        const auto kernel = read_kernel(r, "rbf");
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix&) {
            return train_kernel_least_squares(Xl, yl, kernel, lambda);
        };
    } else if (model == "nmc") {
        e.train = [](const Matrix& Xl, Labels yl, const Matrix&) { return train_nearest_mean(Xl, yl); };
    } else if (model == "lda") {
        const double reg = r.nonneg("reg", 0.0);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix&) { return train_lda(Xl, yl, reg); };
    } else if (model == "logistic") {
        const double lambda = r.nonneg("lambda", 0.0);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix&) { return train_logistic(Xl, yl, lambda); };
    } else if (model == "svm") {
        const double C = r.positive("C", 1.0);
        const auto kernel = read_kernel(r, "linear");
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix&) { return train_svm(Xl, yl, kernel, C); };
    } else if (model == "self-learning") {
        const auto base_name = r.text("base", "ls", supervised_models);
        const int max_iter = static_cast<int>(r.integer("max_iter", 100, 0));
        const auto base = make_classifier(base_name, r.rest(), pointer);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) {
            const SupervisedTrainer inner = [&](const Matrix& X, Labels y) { return base.train(X, y, no_rows(X)); };
            return self_learning(inner, Xl, yl, Xu, max_iter);
        };
        return e;
    } else if (model == "em-nmc" || model == "em-lda") {
        const double tol = r.positive("tol", 1e-8);
        const int max_iter = static_cast<int>(r.integer("max_iter", 1000, 1));
        const auto family = model == "em-nmc" ? GaussianFamily::nmc : GaussianFamily::lda;
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) {
            return train_em_generative(family, Xl, yl, Xu, tol, max_iter);
        };
    } else if (model == "mc-nmc") {
        e.train = [](const Matrix& Xl, Labels yl, const Matrix& Xu) { return train_moment_constrained_nmc(Xl, yl, Xu); };
    } else if (model == "usm") {
        const double lambda = r.nonneg("lambda", 0.0);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) { return train_usm_least_squares(Xl, yl, Xu, lambda); };
    } else if (model == "icls") {
        const double lambda = r.nonneg("lambda", 0.0);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) { return train_icls(Xl, yl, Xu, lambda); };
    } else if (model == "icls-projection") {
        const double lambda = r.nonneg("lambda", 0.0);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) {
            return train_icls_projection(Xl, yl, Xu, lambda);
        };
    } else if (model == "erlr") {
        const double entropy = r.nonneg("lambda_entropy", 1.0);
        const double lambda = r.nonneg("lambda", 0.0);
        e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) { return train_erlr(Xl, yl, Xu, entropy, lambda); };
    } else if (model == "laprls" || model == "lapsvm") {
        LapParams p;
        p.lambda = r.positive("lambda", p.lambda);
        p.gamma = r.nonneg("gamma", p.gamma);
        const auto kernel = read_kernel(r, "rbf");
        const auto graph = read_graph(r, kernel);
        if (model == "laprls") {
            e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) {
                return train_laplacian_rls(Xl, yl, Xu, kernel, p, graph);
            };
        } else {
            e.train = [=](const Matrix& Xl, Labels yl, const Matrix& Xu) {
                return train_laplacian_svm(Xl, yl, Xu, kernel, p, graph);
            };
        }
    } else {
        std::string list;
        for (const auto& m : model_names()) list += (list.empty() ? "" : ", ") + m;
        throw FieldError(pointer, "unknown model '" + model + "' (valid: " + list + ")");
    }
    r.finish();
    return e;
}

std::vector<std::string> dataset_names() {
    return {"two-gaussian", "crescent-moon", "spirals", "parallel-planes", "two-circles"};
}

Dataset make_dataset(const std::string& generator, const json& params, std::uint64_t seed, const std::string& pointer) {
    Reader r(params, pointer);
    Dataset d;
    try {
        if (generator == "two-gaussian") {
            const auto n = static_cast<std::size_t>(r.integer("n", 2000, 2));
            const int dim = static_cast<int>(r.integer("d", 2, 1));
            const double variance = r.positive("variance", 1.0);
            const bool expected = r.boolean("expected", true);
            r.finish();
            d = generate_two_class_gaussian(n, dim, variance, expected, seed);
        } else if (generator == "crescent-moon") {
            const auto n = static_cast<std::size_t>(r.integer("n_per_class", 100, 1));
            const double sigma = r.nonneg("sigma", 0.3);
            r.finish();
            d = generate_crescent_moon(n, sigma, seed);
        } else if (generator == "spirals") {
            const auto n = static_cast<std::size_t>(r.integer("n_per_class", 100, 1));
            const double sigma = r.nonneg("sigma", 0.025);
            const double turns = r.positive("turns", 1.0);
            r.finish();
            d = generate_spirals(n, sigma, turns, seed);
        } else if (generator == "parallel-planes") {
            const auto n = static_cast<std::size_t>(r.integer("n_per_class", 100, 1));
            const double sigma = r.nonneg("sigma", 0.1);
            r.finish();
            d = generate_parallel_planes(n, sigma, seed);
        } else if (generator == "two-circles") {
            const auto n = static_cast<std::size_t>(r.integer("n_per_class", 100, 1));
            const double sigma = r.nonneg("sigma", 0.1);
            r.finish();
            d = generate_two_circles(n, sigma, seed);
        } else {
            std::string list;
            for (const auto& m : dataset_names()) list += (list.empty() ? "" : ", ") + m;
            throw FieldError(pointer, "unknown dataset '" + generator + "' (valid: " + list + ")");
        }
    } catch (const ArgumentError& e) {
        throw FieldError(pointer, e.what());
    }
    return d;
}

}  // namespace ssllab
