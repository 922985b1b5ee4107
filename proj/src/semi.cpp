#include "ssllab/semi.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace ssllab {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<int> concat(Labels a, const std::vector<int>& b) {
    std::vector<int> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

double log_sum_exp(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Rows: log pi_c + log N(x; mu_c, Sigma).
Matrix log_joint(const GaussianModel& g, const Matrix& X) {
    Eigen::LLT<Matrix> llt(g.covariance);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    const Matrix Lm = llt.matrixL();
    const double log_det = 2.0 * Lm.diagonal().array().log().sum();
    const double d = static_cast<double>(X.cols());
    Matrix out(X.rows(), 2);
    for (int c = 0; c < 2; ++c) {
        const Matrix diff = (X.rowwise() - g.means.row(c)).transpose();
        const Matrix z = llt.matrixL().solve(diff);
        out.col(c) = (-0.5 * z.colwise().squaredNorm().array().transpose() - 0.5 * log_det -
                      0.5 * d * std::log(2.0 * std::numbers::pi) + std::log(g.priors[static_cast<std::size_t>(c)]))
                         .matrix();
    }
    return out;
}

GaussianModel weighted_gaussian(GaussianFamily family, const Matrix& X, const Vector& w1) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Vector w0 = Vector::Ones(n) - w1;
    const double n1 = w1.sum();
    const double n0 = w0.sum();
    GaussianModel g;
    g.priors = {n0 / static_cast<double>(n), n1 / static_cast<double>(n)};
    g.means.resize(2, d);
    g.means.row(0) = (w0.transpose() * X) / n0;
    g.means.row(1) = (w1.transpose() * X) / n1;
    Matrix scatter = Matrix::Zero(d, d);
    for (int c = 0; c < 2; ++c) {
        const Matrix diff = X.rowwise() - g.means.row(c);
        const Vector& w = c == 0 ? w0 : w1;
        scatter.noalias() += diff.transpose() * w.asDiagonal() * diff;
    }
    if (family == GaussianFamily::nmc) {
        g.spherical = true;
        double var = scatter.trace() / (static_cast<double>(n) * static_cast<double>(d));
        if (!(var > 1e-9)) {
            var = 1e-9;
            g.floored = true;
        }
        g.covariance = var * Matrix::Identity(d, d);
    } else {
        g.covariance = scatter / static_cast<double>(n);
        g.covariance = 0.5 * (g.covariance + g.covariance.transpose()).eval();
        Eigen::LLT<Matrix> llt(g.covariance);
        if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
            g.covariance.diagonal().array() += 1e-9;
            g.floored = true;
        }
    }
    return g;
}

}  // namespace

Fit self_learning(const SupervisedTrainer& base, const Matrix& Xl, Labels yl, const Matrix& Xu, int max_iter) {
    if (max_iter < 0) throw ArgumentError("max_iter must be nonnegative");
    Fit fit = base(Xl, yl);
    if (Xu.rows() == 0) {
        fit.responsibilities = Vector(0);
        return fit;
    }
    const Matrix X = stack_rows(Xl, Xu);
    std::vector<int> pseudo = predict_codes(fit.params, Xu);
    for (int it = 1; it <= max_iter; ++it) {
        const auto y = concat(yl, pseudo);
        try {
            fit = base(X, y);
        } catch (const Error& e) {
            throw Error("self-learning iteration " + std::to_string(it) + ": " + e.what());
        }
        fit.meta.iterations = it;
        fit.meta.converged = false;
        const auto next = predict_codes(fit.params, Xu);
        if (next == pseudo) {
            fit.meta.converged = true;
            break;
        }
        pseudo = next;
    }
    Vector resp(Xu.rows());
    for (Eigen::Index i = 0; i < Xu.rows(); ++i) resp[i] = pseudo[static_cast<std::size_t>(i)];
    fit.responsibilities = resp;
    return fit;
}

double observed_log_likelihood(const GaussianModel& g, const Matrix& Xl, Labels yl, const Matrix& Xu) {
    double ll = 0.0;
    if (Xl.rows() > 0) {
        const Matrix lj = log_joint(g, Xl);
        for (Eigen::Index i = 0; i < Xl.rows(); ++i) ll += lj(i, yl[static_cast<std::size_t>(i)]);
    }
    if (Xu.rows() > 0) {
        const Matrix lj = log_joint(g, Xu);
        for (Eigen::Index i = 0; i < Xu.rows(); ++i) ll += log_sum_exp(lj(i, 0), lj(i, 1));
    }
    return ll;
}

Fit train_em_generative(GaussianFamily family, const Matrix& Xl, Labels yl, const Matrix& Xu, double tol,
                        int max_iter, std::vector<double>* loglik) {
    require_rows(Xl, yl);
    require_both_classes(yl);
    if (Xu.rows() > 0 && Xu.cols() != Xl.cols()) throw ShapeError("unlabeled data has a different column count");
    if (!(tol >= 0.0) || max_iter < 0) throw ArgumentError("tol and max_iter must be nonnegative");
    const Matrix X = stack_rows(Xl, Xu);
    Vector w1(X.rows());
    for (Eigen::Index i = 0; i < Xl.rows(); ++i) w1[i] = yl[static_cast<std::size_t>(i)];

    GaussianModel g;
    if (family == GaussianFamily::nmc) {
        g = std::get<GaussianModel>(train_nearest_mean(Xl, yl).params);
    } else {
        w1.tail(Xu.rows()).setZero();
        g = weighted_gaussian(family, Xl, w1.head(Xl.rows()));
    }
    Fit fit{g, Vector(0), {true, 0, 0}};
    if (loglik) loglik->clear();
    if (Xu.rows() == 0) {
        if (loglik) loglik->push_back(observed_log_likelihood(g, Xl, yl, Xu));
        return fit;
    }
    double ll = observed_log_likelihood(g, Xl, yl, Xu);
    if (loglik) loglik->push_back(ll);
    bool floored = g.floored;
    fit.meta.converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        w1.tail(Xu.rows()) = class1_scores(g, Xu);
        g = weighted_gaussian(family, X, w1);
        floored |= g.floored;
        const double next = observed_log_likelihood(g, Xl, yl, Xu);
        if (loglik) loglik->push_back(next);
        fit.meta.iterations = it;
        const bool done = next - ll < tol;
        ll = next;
        if (done) {
            fit.meta.converged = true;
            break;
        }
    }
    g.floored = floored;
    fit.params = g;
    fit.responsibilities = class1_scores(g, Xu);
    return fit;
}

Fit train_moment_constrained_nmc(const Matrix& Xl, Labels yl, const Matrix& Xu) {
    Fit fit = train_nearest_mean(Xl, yl);
    if (Xu.rows() > 0 && Xu.cols() != Xl.cols()) throw ShapeError("unlabeled data has a different column count");
    auto& g = std::get<GaussianModel>(fit.params);
    const Matrix X = stack_rows(Xl, Xu);
    const Eigen::RowVectorXd mu_all = X.colwise().mean();
    const Eigen::RowVectorXd weighted = g.priors[0] * g.means.row(0) + g.priors[1] * g.means.row(1);
    const Eigen::RowVectorXd shift = mu_all - weighted;
    g.means.rowwise() += shift;
    double ss = 0.0;
    for (Eigen::Index i = 0; i < Xl.rows(); ++i) ss += (Xl.row(i) - g.means.row(yl[static_cast<std::size_t>(i)])).squaredNorm();
    double var = ss / (static_cast<double>(Xl.rows()) * static_cast<double>(Xl.cols()));
    g.floored = false;
    if (!(var > 0.0)) {
        var = 1e-12;
        g.floored = true;
    }
    g.covariance = var * Matrix::Identity(Xl.cols(), Xl.cols());
    return fit;
}

Fit train_usm_least_squares(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda) {
    require_rows(Xl, yl);
    if (Xl.rows() < 1) throw ArgumentError("least squares needs at least one labeled point");
    if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
    if (Xu.rows() > 0 && Xu.cols() != Xl.cols()) throw ShapeError("unlabeled data has a different column count");
    const Matrix Al = augment(Xl);
    const Matrix Aall = augment(stack_rows(Xl, Xu));
    const double nl = static_cast<double>(Xl.rows());
    const double n = static_cast<double>(Aall.rows());
    const Matrix N = (nl / n) * (Aall.transpose() * Aall) + least_squares_penalty(Xl.cols(), lambda, nl);
    const Vector theta = solve_linear_jitter(N, Al.transpose() * encode(yl, Target::zero_one), "use lambda > 0");
    return {LinearModel{theta.head(Xl.cols()), theta[Xl.cols()], LinearModel::Link::identity}, std::nullopt, {}};
}

ImplicitLeastSquares implicit_least_squares(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda) {
    require_rows(Xl, yl);
    if (Xl.rows() < 1) throw ArgumentError("least squares needs at least one labeled point");
    if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
    if (Xu.rows() > 0 && Xu.cols() != Xl.cols()) throw ShapeError("unlabeled data has a different column count");
    const Matrix Al = augment(Xl);
    const Matrix Au = augment(Xu.rows() > 0 ? Xu : Matrix(0, Xl.cols()));
    const Matrix Aall = stack_rows(Al, Au);
    const Matrix N = Aall.transpose() * Aall +
                     least_squares_penalty(Xl.cols(), lambda, static_cast<double>(Aall.rows()));
    Matrix rhs(N.rows(), 1 + Au.rows());
    rhs.col(0) = Al.transpose() * encode(yl, Target::zero_one);
    rhs.rightCols(Au.rows()) = Au.transpose();
    const Matrix sol = solve_linear_jitter(N, rhs, "use lambda > 0");
    return {sol.col(0), sol.rightCols(Au.rows())};
}

double icls_labeled_loss(const ImplicitLeastSquares& ils, const Matrix& Xl, Labels yl, const Vector& q) {
    const Vector r = augment(Xl) * ils.weights(q) - encode(yl, Target::zero_one);
    return r.squaredNorm() / static_cast<double>(Xl.rows());
}

namespace {

Fit finish_icls(const Matrix& Xl, const ImplicitLeastSquares& ils, const OptimResult& r) {
    const Vector w = ils.weights(r.x);
    return {LinearModel{w.head(Xl.cols()), w[Xl.cols()], LinearModel::Link::identity}, r.x,
            {r.converged, r.iterations, 0}};
}

Vector icls_start(const Fit& sup, const Matrix& Xu) {
    const auto& m = std::get<LinearModel>(sup.params);
    return ((Xu * m.w).array() + m.b).cwiseMax(0.0).cwiseMin(1.0).matrix();
}

}  // namespace

Fit train_icls(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda, const OptimSettings& s) {
    Fit sup = train_least_squares(Xl, yl, lambda);
    if (Xu.rows() == 0) {
        sup.responsibilities = Vector(0);
        return sup;
    }
    const auto ils = implicit_least_squares(Xl, yl, Xu, lambda);
    const Matrix Al = augment(Xl);
    const double scale = 1.0 / std::sqrt(static_cast<double>(Xl.rows()));
    const Matrix G = scale * (Al * ils.B);
    const Vector h = scale * (encode(yl, Target::zero_one) - Al * ils.w0);
    const Vector lo = Vector::Zero(Xu.rows());
    const Vector hi = Vector::Ones(Xu.rows());
    const auto r = minimize_box_least_squares(G, h, icls_start(sup, Xu), lo, hi, s);
    return finish_icls(Xl, ils, r);
}

Fit train_icls_projection(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda, const OptimSettings& s) {
    Fit sup = train_least_squares(Xl, yl, lambda);
    if (Xu.rows() == 0) {
        sup.responsibilities = Vector(0);
        return sup;
    }
    const auto& ms = std::get<LinearModel>(sup.params);
    Vector w_sup(Xl.cols() + 1);
    w_sup << ms.w, ms.b;
    const auto ils = implicit_least_squares(Xl, yl, Xu, lambda);
    const Matrix Aall = augment(stack_rows(Xl, Xu));
    const Matrix M = (Aall.transpose() * Aall) / static_cast<double>(Aall.rows());
    // D(q) = |R (w(q) - w_sup)|^2 with M = R'R.
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const Matrix R = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    const Matrix G = R * ils.B;
    const Vector h = R * (w_sup - ils.w0);
    const Vector lo = Vector::Zero(Xu.rows());
    const Vector hi = Vector::Ones(Xu.rows());
    const auto r = minimize_box_least_squares(G, h, icls_start(sup, Xu), lo, hi, s);
    return finish_icls(Xl, ils, r);
}

Objective erlr_objective(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda_entropy, double lambda_ridge) {
    const auto base = logistic_objective(Xl, yl, lambda_ridge);
    auto U = std::make_shared<const Matrix>(Xu);
    return [base, U, lambda_entropy](const Vector& theta, Vector* grad) {
        double v = base(theta, grad);
        const Eigen::Index nu = U->rows();
        if (nu == 0 || lambda_entropy == 0.0) return v;
        const Eigen::Index d = U->cols();
        const Vector z = (*U * theta.head(d)).array() + theta[d];
        const double c = lambda_entropy / static_cast<double>(nu);
        Vector dz(nu);
        for (Eigen::Index i = 0; i < nu; ++i) {
            const double p = sigmoid(z[i]);
            v += c * (p * softplus(-z[i]) + (1.0 - p) * softplus(z[i]));
            dz[i] = -c * z[i] * p * (1.0 - p);
        }
        if (grad) {
            grad->head(d) += U->transpose() * dz;
            (*grad)[d] += dz.sum();
        }
        return v;
    };
}

Fit train_erlr(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda_entropy, double lambda_ridge,
               const OptimSettings& s) {
    if (!(lambda_entropy >= 0.0)) throw ArgumentError("lambda_entropy must be nonnegative");
    if (Xu.rows() > 0 && Xu.cols() != Xl.cols()) throw ShapeError("unlabeled data has a different column count");
    Fit sup = train_logistic(Xl, yl, lambda_ridge, s);
    if (Xu.rows() == 0 || lambda_entropy == 0.0) return sup;
    const auto& m = std::get<LinearModel>(sup.params);
    Vector theta0(Xl.cols() + 1);
    theta0 << m.w, m.b;
    const auto r = minimize(erlr_objective(Xl, yl, Xu, lambda_entropy, lambda_ridge), theta0, s);
    LinearModel out{r.x.head(Xl.cols()), r.x[Xl.cols()], LinearModel::Link::logistic};
    return {out, class1_scores(out, Xu), {r.converged, r.iterations, 0}};
}

void LapParams::validate() const {
    if (!(lambda >= 0.0) || !(gamma >= 0.0)) throw ArgumentError("lambda and gamma must be nonnegative");
}

namespace {

struct LaplacianSetup {
    Matrix X;
    Matrix K;
    Matrix L;
};

LaplacianSetup laplacian_setup(const Matrix& Xl, Labels yl, const Matrix& Xu, const KernelSpec& kernel,
                               const LapParams& p, const GraphConfig& graph) {
    require_rows(Xl, yl);
    p.validate();
    if (Xl.rows() < 1) throw ArgumentError("needs at least one labeled point");
    if (Xu.rows() > 0 && Xu.cols() != Xl.cols()) throw ShapeError("unlabeled data has a different column count");
    LaplacianSetup s;
    s.X = stack_rows(Xl, Xu);
    s.K = gram_matrix(kernel, s.X, s.X);
    if (p.gamma > 0.0) {
        if (s.X.rows() < 2) throw ArgumentError("manifold term needs at least 2 points");
        s.L = build_graph(s.X, graph).L;
    }
    return s;
}

}  // namespace

Fit train_laplacian_rls(const Matrix& Xl, Labels yl, const Matrix& Xu, const KernelSpec& kernel, const LapParams& p,
                        const GraphConfig& graph) {
    const auto s = laplacian_setup(Xl, yl, Xu, kernel, p, graph);
    const Eigen::Index n = s.X.rows();
    const Eigen::Index nl = Xl.rows();
    const Vector y = encode(yl, Target::pm_one);
    Matrix A = Matrix::Zero(n + 1, n + 1);
    Vector rhs = Vector::Zero(n + 1);
    A.topRows(nl).leftCols(n) = s.K.topRows(nl);
    A.topLeftCorner(n, n).diagonal().array() += p.lambda * static_cast<double>(nl);
    if (p.gamma > 0.0) {
        A.topLeftCorner(n, n) += (p.gamma * static_cast<double>(nl) / static_cast<double>(n * n)) * (s.L * s.K);
    }
    A.col(n).head(nl).setOnes();
    A.row(n).head(n) = s.K.topRows(nl).colwise().sum();
    A(n, n) = static_cast<double>(nl);
    rhs.head(nl) = y;
    rhs[n] = y.sum();
    const Vector sol = solve_linear_jitter(A, rhs, "increase lambda");
    KernelModel m{sol.head(n), sol[n], s.X, kernel, Target::pm_one, KernelModel::Loss::squared};
    return {m, std::nullopt, {}};
}

Fit train_laplacian_svm(const Matrix& Xl, Labels yl, const Matrix& Xu, const KernelSpec& kernel, const LapParams& p,
                        const GraphConfig& graph, const OptimSettings& opt) {
    require_both_classes(yl);
    const auto s = laplacian_setup(Xl, yl, Xu, kernel, p, graph);
    SquaredHingeProblem prob{s.K, encode(yl, Target::pm_one), p.lambda, p.gamma, p.gamma > 0.0 ? &s.L : nullptr};
    const auto r = solve_squared_hinge(prob, opt);
    const Eigen::Index n = s.X.rows();
    KernelModel m{r.x.head(n), r.x[n], s.X, kernel, Target::pm_one, KernelModel::Loss::squared_hinge};
    return {m, std::nullopt, {r.converged, r.iterations, 0}};
}

}  // namespace ssllab
