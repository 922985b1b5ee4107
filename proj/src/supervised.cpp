#include "ssllab/supervised.hpp"

#include <cmath>
#include <memory>

namespace ssllab {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct ClassStats {
    std::array<double, 2> count{0.0, 0.0};
    Matrix means;
    Matrix scatter;  // sum over classes of (x - mu_c)(x - mu_c)'
};

ClassStats class_stats(const Matrix& X, Labels y) {
    ClassStats s;
    const Eigen::Index d = X.cols();
    s.means = Matrix::Zero(2, d);
    for (std::size_t i = 0; i < y.size(); ++i) {
        s.count[static_cast<std::size_t>(y[i])] += 1.0;
        s.means.row(y[i]) += X.row(static_cast<Eigen::Index>(i));
    }
    for (int c = 0; c < 2; ++c) s.means.row(c) /= s.count[static_cast<std::size_t>(c)];
    s.scatter = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Vector diff = (X.row(static_cast<Eigen::Index>(i)) - s.means.row(y[i])).transpose();
        s.scatter.noalias() += diff * diff.transpose();
    }
    return s;
}

}  // namespace

Matrix augment(const Matrix& X) {
    Matrix A(X.rows(), X.cols() + 1);
    A << X, Vector::Ones(X.rows());
    return A;
}

void require_rows(const Matrix& X, Labels y) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw ShapeError("label count " + std::to_string(y.size()) + " does not match row count " +
                         std::to_string(X.rows()));
    }
    for (int v : y) {
        if (v != 0 && v != 1) throw EncodingError("label code must be 0 or 1");
    }
}

void require_both_classes(Labels y) {
    bool seen[2] = {false, false};
    for (int v : y) seen[v == 1] = true;
    if (!seen[0] || !seen[1]) {
        throw MissingClassError(std::string("labeled data lacks class index ") + (seen[0] ? "1" : "0"));
    }
}

Matrix least_squares_penalty(Eigen::Index d, double lambda, double n) {
    Matrix P = Matrix::Zero(d + 1, d + 1);
    P.diagonal().head(d).setConstant(lambda * n);
    return P;
}

Fit train_least_squares(const Matrix& Xl, Labels yl, double lambda) {
    require_rows(Xl, yl);
    if (Xl.rows() < 1) throw ArgumentError("least squares needs at least one labeled point");
    if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
    const Matrix A = augment(Xl);
    const Vector y = encode(yl, Target::zero_one);
    const Matrix N = A.transpose() * A + least_squares_penalty(Xl.cols(), lambda, static_cast<double>(Xl.rows()));
    const Vector theta = solve_linear_jitter(N, A.transpose() * y, "use lambda > 0");
    LinearModel m{theta.head(Xl.cols()), theta[Xl.cols()], LinearModel::Link::identity};
    return {m, std::nullopt, {}};
}

Fit train_kernel_least_squares(const Matrix& Xl, Labels yl, const KernelSpec& kernel, double lambda) {
    require_rows(Xl, yl);
    if (Xl.rows() < 1) throw ArgumentError("kernel least squares needs at least one labeled point");
    if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
    const Eigen::Index n = Xl.rows();
    const Matrix K = gram_matrix(kernel, Xl, Xl);
    // Bordered system [K + lambda n I, 1; 1', 0] [alpha; b] = [y; 0].
    Matrix S = Matrix::Zero(n + 1, n + 1);
    S.topLeftCorner(n, n) = K;
    S.topLeftCorner(n, n).diagonal().array() += lambda * static_cast<double>(n);
    S.block(0, n, n, 1).setOnes();
    S.block(n, 0, 1, n).setOnes();
    Vector rhs = Vector::Zero(n + 1);
    rhs.head(n) = encode(yl, Target::zero_one);
    const Vector sol = solve_linear_jitter(S, rhs, "use lambda > 0");
    KernelModel m{sol.head(n), sol[n], Xl, kernel, Target::zero_one, KernelModel::Loss::squared};
    return {m, std::nullopt, {}};
}

Fit train_nearest_mean(const Matrix& Xl, Labels yl) {
    require_rows(Xl, yl);
    require_both_classes(yl);
    const auto s = class_stats(Xl, yl);
    const double n = static_cast<double>(Xl.rows());
    const double d = static_cast<double>(Xl.cols());
    GaussianModel g;
    g.priors = {s.count[0] / n, s.count[1] / n};
    g.means = s.means;
    g.spherical = true;
    double var = s.scatter.trace() / (n * d);
    if (!(var > 0.0)) {
        var = 1e-12;
        g.floored = true;
    }
    g.covariance = var * Matrix::Identity(Xl.cols(), Xl.cols());
    return {g, std::nullopt, {}};
}

Fit train_lda(const Matrix& Xl, Labels yl, double reg) {
    require_rows(Xl, yl);
    require_both_classes(yl);
    if (!(reg >= 0.0)) throw ArgumentError("reg must be nonnegative");
    const auto s = class_stats(Xl, yl);
    const double n = static_cast<double>(Xl.rows());
    GaussianModel g;
    g.priors = {s.count[0] / n, s.count[1] / n};
    g.means = s.means;
    g.covariance = s.scatter / n;
    g.covariance.diagonal().array() += reg;
    Eigen::LLT<Matrix> llt(g.covariance);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
        throw SingularMatrixError("pooled covariance is singular; use reg > 0");
    }
    return {g, std::nullopt, {}};
}

Objective logistic_objective(const Matrix& X, Labels y, double lambda) {
    auto Xc = std::make_shared<const Matrix>(X);
    auto t = std::make_shared<const Vector>(encode(y, Target::zero_one));
    return [Xc, t, lambda](const Vector& theta, Vector* grad) {
        const Eigen::Index d = Xc->cols();
        const double n = static_cast<double>(Xc->rows());
        const Vector w = theta.head(d);
        const Vector z = (*Xc * w).array() + theta[d];
        double f = lambda * w.squaredNorm();
        Vector r(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            f += (softplus(z[i]) - (*t)[i] * z[i]) / n;
            r[i] = (sigmoid(z[i]) - (*t)[i]) / n;
        }
        if (grad) {
            grad->resize(d + 1);
            grad->head(d) = Xc->transpose() * r + 2.0 * lambda * w;
            (*grad)[d] = r.sum();
        }
        return f;
    };
}

Fit train_logistic(const Matrix& Xl, Labels yl, double lambda, const OptimSettings& s) {
    require_rows(Xl, yl);
    require_both_classes(yl);
    if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
    const Eigen::Index d = Xl.cols();
    const double p = encode(yl, Target::zero_one).mean();
    Vector theta0 = Vector::Zero(d + 1);
    theta0[d] = std::log(p / (1.0 - p));
    const auto r = minimize(logistic_objective(Xl, yl, lambda), theta0, s);
    LinearModel m{r.x.head(d), r.x[d], LinearModel::Link::logistic};
    return {m, std::nullopt, {r.converged, r.iterations, 0}};
}

Objective squared_hinge_objective(const SquaredHingeProblem& p) {
    auto K = std::make_shared<const Matrix>(p.K);
    auto L = p.L ? std::make_shared<const Matrix>(*p.L) : nullptr;
    const Vector y = p.y;
    const double lambda = p.lambda;
    const double gamma = p.gamma;
    return [K, L, y, lambda, gamma](const Vector& theta, Vector* grad) {
        const Eigen::Index n = K->rows();
        const Eigen::Index nl = y.size();
        const Vector alpha = theta.head(n);
        const Vector Ka = *K * alpha;
        const Vector f = Ka.array() + theta[n];
        Vector df = Vector::Zero(n);  // derivative with respect to f
        double v = lambda * alpha.dot(Ka);
        for (Eigen::Index i = 0; i < nl; ++i) {
            const double m = 1.0 - y[i] * f[i];
            if (m > 0.0) {
                v += m * m / static_cast<double>(nl);
                df[i] = -2.0 * y[i] * m / static_cast<double>(nl);
            }
        }
        if (gamma > 0.0 && L) {
            const double c = gamma / static_cast<double>(n * n);
            const Vector Lf = *L * f;
            v += c * f.dot(Lf);
            df += 2.0 * c * Lf;
        }
        if (grad) {
            grad->resize(n + 1);
            grad->head(n) = *K * df + 2.0 * lambda * Ka;
            (*grad)[n] = df.sum();
        }
        return v;
    };
}

OptimResult solve_squared_hinge(const SquaredHingeProblem& p, const OptimSettings& s) {
    s.validate();
    const Eigen::Index n = p.K.rows();
    const Eigen::Index nl = p.y.size();
    if (nl < 1 || nl > n) throw ShapeError("squared hinge: labeled count out of range");
    const auto f = squared_hinge_objective(p);
    const bool manifold = p.gamma > 0.0 && p.L;
    Matrix LK;
    if (manifold) LK = (p.gamma * static_cast<double>(nl) / static_cast<double>(n * n)) * (*p.L * p.K);

    OptimResult r;
    r.x = Vector::Zero(n + 1);
    r.value = f(r.x, nullptr);
    r.history.push_back(r.value);
    std::vector<char> active(static_cast<std::size_t>(nl), 1);
    for (int it = 0; it < s.max_iter; ++it) {
        // Stationarity for the current active set S, scaled by n_l:
        //   (I_S K + lambda n_l I + gamma n_l / n^2 L K) alpha + I_S 1 b = I_S y
        //   1' I_S K alpha + |S| b = 1' I_S y
        Matrix A = Matrix::Zero(n + 1, n + 1);
        Vector rhs = Vector::Zero(n + 1);
        A.topLeftCorner(n, n).diagonal().setConstant(p.lambda * static_cast<double>(nl));
        if (manifold) A.topLeftCorner(n, n) += LK;
        int active_count = 0;
        for (Eigen::Index i = 0; i < nl; ++i) {
            if (!active[static_cast<std::size_t>(i)]) continue;
            ++active_count;
            A.row(i).head(n) += p.K.row(i);
            A(i, n) = 1.0;
            A.row(n).head(n) += p.K.row(i);
            rhs[i] = p.y[i];
            rhs[n] += p.y[i];
        }
        if (active_count == 0) {
            A(n, n) = 1.0;
            rhs[n] = r.x[n];
        } else {
            A(n, n) = active_count;
        }
        const Vector target = solve_linear_jitter(A, rhs, "increase lambda");
        const Vector dir = target - r.x;
        double t = 1.0;
        double fn = f(r.x + dir, nullptr);
        while (!(fn <= r.value) && t > 1e-12) {
            t *= 0.5;
            fn = f(r.x + t * dir, nullptr);
        }
        if (!(fn <= r.value)) break;
        r.x += t * dir;
        r.value = fn;
        r.history.push_back(fn);
        r.iterations = it + 1;

        const Vector fx = (p.K.topRows(nl) * r.x.head(n)).array() + r.x[n];
        bool changed = false;
        for (Eigen::Index i = 0; i < nl; ++i) {
            const char a = (1.0 - p.y[i] * fx[i]) > 0.0;
            changed |= a != active[static_cast<std::size_t>(i)];
            active[static_cast<std::size_t>(i)] = a;
        }
        if (!changed && t == 1.0) {
            r.converged = true;
            break;
        }
    }
    return r;
}

Objective svm_objective(const Matrix& K, Labels y, double C) {
    SquaredHingeProblem p{K, encode(y, Target::pm_one), 1.0 / (2.0 * C * static_cast<double>(y.size())), 0.0, nullptr};
    return squared_hinge_objective(p);
}

Fit train_svm(const Matrix& Xl, Labels yl, const KernelSpec& kernel, double C, const OptimSettings& s) {
    require_rows(Xl, yl);
    require_both_classes(yl);
    if (!(C > 0.0)) throw ArgumentError("C must be positive");
    const Matrix K = gram_matrix(kernel, Xl, Xl);
    const double nl = static_cast<double>(Xl.rows());
    SquaredHingeProblem p{K, encode(yl, Target::pm_one), 1.0 / (2.0 * C * nl), 0.0, nullptr};
    const auto r = solve_squared_hinge(p, s);
    KernelModel m{r.x.head(Xl.rows()), r.x[Xl.rows()], Xl, kernel, Target::pm_one, KernelModel::Loss::squared_hinge};
    return {m, std::nullopt, {r.converged, r.iterations, 0}};
}

}  // namespace ssllab
