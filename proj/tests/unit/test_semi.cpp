#include "ssllab/semi.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ssllab;

namespace {

const Matrix kNoRows(0, 2);

struct Instance {
    Matrix Xl;
    std::vector<int> yl;
    Matrix Xu;
    std::vector<int> yu;  // true labels of Xu
};

Instance instance(Eigen::Index nl, Eigen::Index nu, Eigen::Index d, double shift, std::uint64_t seed) {
    const auto l = testutil::blobs(nl, d, shift, seed);
    const auto u = testutil::blobs(nu, d, shift, seed + 1000);
    return {l.X, l.y, u.X, u.y};
}

Matrix probe(Eigen::Index d, std::uint64_t seed) { return testutil::random_matrix(25, d, seed, 2.0); }

double dv_gap(const Fit& a, const Fit& b, const Matrix& X) {
    return testutil::max_abs_diff(decision_values(a.params, X), decision_values(b.params, X));
}

GraphConfig small_knn() {
    GraphConfig g;
    g.k = 4;
    g.weight_sigma = 0.5;
    return g;
}

double all_data_loss(const Fit& f, const Instance& in) {
    const Matrix X = stack_rows(in.Xl, in.Xu);
    std::vector<int> y = in.yl;
    y.insert(y.end(), in.yu.begin(), in.yu.end());
    return mean_loss(f.params, X, y);
}

}  // namespace

TEST(EmptyUnlabeled, EveryTrainerReducesToItsSupervisedCounterpart) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto in = instance(16, 0, 2, 0.8, seed);
        const Matrix P = probe(2, seed + 7);
        const auto ls = [](const Matrix& X, Labels y) { return train_least_squares(X, y, 0.01); };
        EXPECT_LE(dv_gap(self_learning(ls, in.Xl, in.yl, kNoRows), ls(in.Xl, in.yl), P), 1e-8);
        EXPECT_LE(dv_gap(train_em_generative(GaussianFamily::nmc, in.Xl, in.yl, kNoRows), train_nearest_mean(in.Xl, in.yl), P),
                  1e-8);
        EXPECT_LE(dv_gap(train_em_generative(GaussianFamily::lda, in.Xl, in.yl, kNoRows), train_lda(in.Xl, in.yl), P), 1e-8);
        EXPECT_LE(dv_gap(train_moment_constrained_nmc(in.Xl, in.yl, kNoRows), train_nearest_mean(in.Xl, in.yl), P), 1e-8);
        EXPECT_LE(dv_gap(train_usm_least_squares(in.Xl, in.yl, kNoRows, 0.01), ls(in.Xl, in.yl), P), 1e-8);
        EXPECT_LE(dv_gap(train_icls(in.Xl, in.yl, kNoRows, 0.01), ls(in.Xl, in.yl), P), 1e-8);
        EXPECT_LE(dv_gap(train_icls_projection(in.Xl, in.yl, kNoRows, 0.01), ls(in.Xl, in.yl), P), 1e-8);
        EXPECT_LE(dv_gap(train_erlr(in.Xl, in.yl, kNoRows, 3.0, 0.01), train_logistic(in.Xl, in.yl, 0.01), P), 1e-8);

        const KernelSpec k = KernelSpec::rbf(0.5);
        const Fit lap = train_laplacian_rls(in.Xl, in.yl, kNoRows, k, {1e-3, 0.0}, small_knn());
        const Vector kls = decision_values(train_kernel_least_squares(in.Xl, in.yl, k, 1e-3).params, P);
        EXPECT_LE(testutil::max_abs_diff(decision_values(lap.params, P), 2.0 * kls), 1e-6);

        const double lambda = 1e-2;
        const Fit lsvm = train_laplacian_svm(in.Xl, in.yl, kNoRows, k, {lambda, 0.0}, small_knn());
        const Fit svm = train_svm(in.Xl, in.yl, k, 1.0 / (2.0 * lambda * 16.0));
        EXPECT_LE(dv_gap(lsvm, svm, P), 1e-8);
    }
}

TEST(SelfLearning, ZeroIterationsIsSupervised) {
    const auto in = instance(10, 30, 2, 0.5, 3);
    const auto ls = [](const Matrix& X, Labels y) { return train_least_squares(X, y, 0.0); };
    const Fit f = self_learning(ls, in.Xl, in.yl, in.Xu, 0);
    EXPECT_LE(dv_gap(f, ls(in.Xl, in.yl), probe(2, 4)), 1e-12);
    ASSERT_TRUE(f.responsibilities.has_value());
    EXPECT_EQ(f.responsibilities->size(), 30);
}

TEST(SelfLearning, TightClustersConvergeQuickly) {
    const auto u = testutil::blobs(40, 2, 3.0, 5);
    Matrix U = 0.2 * u.X;
    U.topRows(20).array() -= 2.4;
    U.bottomRows(20).array() += 2.4;
    Matrix Xl(2, 2);
    Xl << -3, -3, 3, 3;
    const std::vector<int> yl{0, 1};
    const auto ls = [](const Matrix& X, Labels y) { return train_least_squares(X, y, 0.0); };
    const Fit f = self_learning(ls, Xl, yl, U);
    EXPECT_TRUE(f.meta.converged);
    EXPECT_LE(f.meta.iterations, 3);
    for (Eigen::Index i = 0; i < 40; ++i) EXPECT_EQ((*f.responsibilities)[i], i < 20 ? 0.0 : 1.0);
}

TEST(SelfLearning, StopsAtFixedPointOrCap) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto in = instance(6, 60, 2, 0.2, seed);
        const auto ls = [](const Matrix& X, Labels y) { return train_least_squares(X, y, 0.1); };
        const Fit f = self_learning(ls, in.Xl, in.yl, in.Xu, 50);
        if (f.meta.converged) {
            std::vector<int> y = in.yl;
            for (Eigen::Index i = 0; i < in.Xu.rows(); ++i) y.push_back(static_cast<int>((*f.responsibilities)[i]));
            const Fit again = ls(stack_rows(in.Xl, in.Xu), y);
            const auto codes = predict_codes(again.params, in.Xu);
            for (Eigen::Index i = 0; i < in.Xu.rows(); ++i) EXPECT_EQ(codes[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(6 + i)]);
        } else {
            EXPECT_EQ(f.meta.iterations, 50);
        }
    }
}

TEST(Em, LogLikelihoodIsMonotone) {
    for (auto fam : {GaussianFamily::nmc, GaussianFamily::lda}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto in = instance(8, 80, 2, 1.0, seed);
            std::vector<double> ll;
            const Fit f = train_em_generative(fam, in.Xl, in.yl, in.Xu, 1e-8, 1000, &ll);
            ASSERT_GE(ll.size(), 2u);
            for (std::size_t i = 1; i < ll.size(); ++i) EXPECT_GE(ll[i], ll[i - 1] - 1e-10);
            const auto& g = std::get<GaussianModel>(f.params);
            EXPECT_NEAR(observed_log_likelihood(g, in.Xl, in.yl, in.Xu), ll.back(), 1e-8);
            const Vector& q = *f.responsibilities;
            EXPECT_EQ(q.size(), 80);
            EXPECT_TRUE((q.array() >= 0.0).all() && (q.array() <= 1.0).all());
        }
    }
}

TEST(Em, PointAtClassMeanGetsThatClass) {
    Matrix Xl(4, 2);
    Xl << -4, 0, -4, 1, 4, 0, 4, 1;
    const std::vector<int> yl{0, 0, 1, 1};
    const auto g0 = std::get<GaussianModel>(train_nearest_mean(Xl, yl).params);
    Matrix Xu = g0.means;
    const Fit f = train_em_generative(GaussianFamily::nmc, Xl, yl, Xu, 1e-8, 1);
    // posterior of the supervised model, written out
    const double var = g0.covariance(0, 0);
    const double d0 = (g0.means.row(1) - g0.means.row(0)).squaredNorm();
    const double post_at_mu1 = 1.0 / (1.0 + std::exp(-d0 / (2.0 * var)));
    EXPECT_GT(post_at_mu1, 0.99);
    EXPECT_GT((*f.responsibilities)[1], 0.99);
    EXPECT_LT((*f.responsibilities)[0], 0.01);
}

TEST(Em, MissingClass) {
    EXPECT_THROW(train_em_generative(GaussianFamily::nmc, Matrix::Ones(2, 2), std::vector<int>{0, 0}, kNoRows),
                 MissingClassError);
}

TEST(MomentConstrained, ConstraintResidual) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto in = instance(10, 50, 3, 0.7, seed);
        in.Xu.array() += 0.3 * static_cast<double>(seed);
        const Fit f = train_moment_constrained_nmc(in.Xl, in.yl, in.Xu);
        const auto& g = std::get<GaussianModel>(f.params);
        const Eigen::RowVectorXd mu_all = stack_rows(in.Xl, in.Xu).colwise().mean();
        const Eigen::RowVectorXd mix = g.priors[0] * g.means.row(0) + g.priors[1] * g.means.row(1);
        EXPECT_LT((mix - mu_all).cwiseAbs().maxCoeff(), 1e-12);
        double ss = 0;
        for (Eigen::Index i = 0; i < 10; ++i) ss += (in.Xl.row(i) - g.means.row(in.yl[static_cast<std::size_t>(i)])).squaredNorm();
        EXPECT_NEAR(g.covariance(1, 1), ss / 30.0, 1e-12);
    }
}

TEST(Usm, MatchesFormulaOracle) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto in = instance(12, 40, 3, 0.5, seed);
        const double lambda = 0.05;
        const Fit f = train_usm_least_squares(in.Xl, in.yl, in.Xu, lambda);
        Matrix A(52, 4), Al(12, 4);
        A << stack_rows(in.Xl, in.Xu), Vector::Ones(52);
        Al << in.Xl, Vector::Ones(12);
        Matrix I = Matrix::Identity(4, 4);
        I(3, 3) = 0.0;
        Vector y(12);
        for (int i = 0; i < 12; ++i) y[i] = in.yl[static_cast<std::size_t>(i)];
        const Vector w = ((12.0 / 52.0) * A.transpose() * A + lambda * 12.0 * I).lu().solve(Al.transpose() * y);
        const auto& m = std::get<LinearModel>(f.params);
        EXPECT_LE((m.w - w.head(3)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(m.b, w[3], 1e-8);
    }
}

TEST(Usm, DuplicatedLabeledDataIsSupervised) {
    const auto in = instance(14, 0, 2, 0.5, 9);
    EXPECT_LE(dv_gap(train_usm_least_squares(in.Xl, in.yl, in.Xl, 0.1), train_least_squares(in.Xl, in.yl, 0.1), probe(2, 1)),
              1e-8);
}

TEST(Icls, MinimizerAndConvexity) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto in = instance(10, 30, 2, 0.4, seed);
        const Fit f = train_icls(in.Xl, in.yl, in.Xu, 0.0);
        const Vector& q = *f.responsibilities;
        EXPECT_TRUE((q.array() >= 0.0).all() && (q.array() <= 1.0).all());
        const auto ils = implicit_least_squares(in.Xl, in.yl, in.Xu, 0.0);
        const double best = icls_labeled_loss(ils, in.Xl, in.yl, q);
        for (double c : {0.0, 1.0, 0.5}) EXPECT_LE(best, icls_labeled_loss(ils, in.Xl, in.yl, Vector::Constant(30, c)) + 1e-12);
        for (std::uint64_t s = 0; s < 5; ++s) {
            const Vector q1 = (testutil::random_matrix(30, 1, seed * 10 + s).array().cwiseAbs().min(1.0)).matrix();
            const Vector q2 = (testutil::random_matrix(30, 1, seed * 10 + s + 5).array().cwiseAbs().min(1.0)).matrix();
            const double mid = icls_labeled_loss(ils, in.Xl, in.yl, 0.5 * (q1 + q2));
            EXPECT_LE(mid, 0.5 * (icls_labeled_loss(ils, in.Xl, in.yl, q1) + icls_labeled_loss(ils, in.Xl, in.yl, q2)) + 1e-10);
        }
    }
}

TEST(Icls, ImplicitWeightsMatchAugmentedFit) {
    const auto in = instance(10, 20, 2, 0.4, 21);
    const auto ils = implicit_least_squares(in.Xl, in.yl, in.Xu, 0.02);
    const Vector q = (testutil::random_matrix(20, 1, 22).array().cwiseAbs().min(1.0)).matrix();
    // ridge solution on [y; q] written out with the penalty lambda * n_all on the weights
    Matrix A(30, 3);
    A << stack_rows(in.Xl, in.Xu), Vector::Ones(30);
    Vector t(30);
    for (int i = 0; i < 10; ++i) t[i] = in.yl[static_cast<std::size_t>(i)];
    t.tail(20) = q;
    Matrix N = A.transpose() * A;
    N(0, 0) += 0.02 * 30.0;
    N(1, 1) += 0.02 * 30.0;
    const Vector w = N.ldlt().solve(A.transpose() * t);
    EXPECT_LE((ils.weights(q) - w).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(IclsProjection, NeverWorseOnAllDataSurrogateLoss) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto in = instance(6, 60, 2, 0.6, seed);
        const Fit sup = train_least_squares(in.Xl, in.yl, 0.0);
        const Fit proj = train_icls_projection(in.Xl, in.yl, in.Xu, 0.0);
        EXPECT_LE(all_data_loss(proj, in), all_data_loss(sup, in) + 1e-9) << "seed " << seed;
        const Vector& q = *proj.responsibilities;
        EXPECT_TRUE((q.array() >= 0.0).all() && (q.array() <= 1.0).all());
    }
}

TEST(IclsProjection, TrueLabelsAreFeasible) {
    const auto in = instance(6, 40, 2, 0.6, 31);
    const auto ils = implicit_least_squares(in.Xl, in.yl, in.Xu, 0.0);
    Vector qt(40);
    for (int i = 0; i < 40; ++i) qt[i] = in.yu[static_cast<std::size_t>(i)];
    const Vector w = ils.weights(qt);
    LinearModel oracle{w.head(2), w[2], LinearModel::Link::identity};
    const Fit sup = train_least_squares(in.Xl, in.yl, 0.0);
    EXPECT_LE(all_data_loss(Fit{oracle, std::nullopt, {}}, in), all_data_loss(sup, in));
}

TEST(Erlr, ZeroEntropyWeightIsLogistic) {
    const auto in = instance(12, 40, 2, 0.5, 41);
    EXPECT_LE(dv_gap(train_erlr(in.Xl, in.yl, in.Xu, 0.0, 0.01), train_logistic(in.Xl, in.yl, 0.01), probe(2, 42)), 1e-6);
}

TEST(Erlr, EntropyAtHalfIsLogTwo) {
    const auto in = instance(6, 1, 2, 0.5, 43);
    const Vector theta = Vector::Zero(3);
    const double with = erlr_objective(in.Xl, in.yl, in.Xu, 1.0, 0.0)(theta, nullptr);
    const double without = erlr_objective(in.Xl, in.yl, in.Xu, 0.0, 0.0)(theta, nullptr);
    EXPECT_NEAR(with - without, std::numbers::ln2, 1e-12);
}

TEST(Erlr, GradientCheck) {
    const auto in = instance(10, 30, 3, 0.5, 44);
    const Objective f = erlr_objective(in.Xl, in.yl, in.Xu, 2.0, 0.1);
    for (std::uint64_t s = 0; s < 3; ++s) EXPECT_LT(check_gradient(f, testutil::random_matrix(4, 1, 45 + s)), 1e-4);
}

TEST(Erlr, EntropyTermLowersUnlabeledEntropy) {
    const auto in = instance(10, 60, 2, 1.0, 46);
    const Fit lr = train_logistic(in.Xl, in.yl, 0.01);
    const Fit er = train_erlr(in.Xl, in.yl, in.Xu, 1.0, 0.01);
    auto entropy = [&](const Fit& f) {
        const Vector p = class1_scores(f.params, in.Xu);
        double h = 0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            if (p[i] > 0 && p[i] < 1) h -= p[i] * std::log(p[i]) + (1 - p[i]) * std::log(1 - p[i]);
        }
        return h / static_cast<double>(p.size());
    };
    EXPECT_LE(entropy(er), entropy(lr) + 1e-12);
}

TEST(LaplacianRls, MatchesDirectFormula) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto in = instance(8, 24, 2, 0.6, seed);
        const KernelSpec k = KernelSpec::rbf(0.7);
        const LapParams p{1e-2, 5.0};
        const Fit f = train_laplacian_rls(in.Xl, in.yl, in.Xu, k, p, small_knn());
        const Matrix X = stack_rows(in.Xl, in.Xu);
        const Matrix K = gram_matrix(k, X, X);
        const Matrix L = build_graph(X, small_knn()).L;
        const Eigen::Index n = 32, nl = 8;
        Matrix J = Matrix::Zero(n, n);
        J.topLeftCorner(nl, nl).setIdentity();
        Vector yt = Vector::Zero(n);
        for (Eigen::Index i = 0; i < nl; ++i) yt[i] = in.yl[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        // stationarity of the squared loss with a free bias, as one block system
        Matrix S(n + 1, n + 1);
        S.topLeftCorner(n, n) = J * K + p.lambda * nl * Matrix::Identity(n, n) + (p.gamma * nl / double(n * n)) * L * K;
        S.topRightCorner(n, 1) = J * Vector::Ones(n);
        S.bottomLeftCorner(1, n) = Vector::Ones(n).transpose() * J * K;
        S(n, n) = static_cast<double>(nl);
        Vector r(n + 1);
        r << J * yt, yt.sum();
        const Vector sol = S.fullPivLu().solve(r);
        const auto& m = std::get<KernelModel>(f.params);
        EXPECT_LE((m.alpha - sol.head(n)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(m.bias, sol[n], 1e-8);
    }
}

TEST(LaplacianRls, ConstantLabels) {
    const auto in = instance(6, 12, 2, 0.5, 51);
    const std::vector<int> ones(6, 1);
    const Fit f = train_laplacian_rls(in.Xl, ones, in.Xu, KernelSpec::rbf(0.5), {1e-4, 1.0}, small_knn());
    const Vector v = decision_values(f.params, in.Xl);
    EXPECT_TRUE((v.array() > 0.0).all());
}

TEST(LaplacianSvm, GradientCheckAndStationarity) {
    const auto in = instance(8, 24, 2, 0.6, 61);
    const Matrix X = stack_rows(in.Xl, in.Xu);
    const KernelSpec k = KernelSpec::rbf(0.5);
    const Matrix K = gram_matrix(k, X, X);
    const Matrix L = build_graph(X, small_knn()).L;
    const SquaredHingeProblem prob{K, encode(in.yl, Target::pm_one), 1e-3, 10.0, &L};
    const Objective f = squared_hinge_objective(prob);
    EXPECT_LT(check_gradient(f, testutil::random_matrix(33, 1, 62, 0.2)), 1e-4);

    const Fit fit = train_laplacian_svm(in.Xl, in.yl, in.Xu, k, {1e-3, 10.0}, small_knn());
    const auto& m = std::get<KernelModel>(fit.params);
    Vector theta(33), g;
    theta << m.alpha, m.bias;
    f(theta, &g);
    EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_TRUE(fit.meta.converged);
}

TEST(LaplacianSvm, GammaZeroMatchesSvm) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto in = instance(12, 20, 2, 0.5, seed + 70);
        const KernelSpec k = KernelSpec::rbf(0.5);
        const double lambda = 1e-3;
        const Fit lsvm = train_laplacian_svm(in.Xl, in.yl, in.Xu, k, {lambda, 0.0}, small_knn());
        const Fit svm = train_svm(in.Xl, in.yl, k, 1.0 / (2.0 * lambda * 12.0));
        EXPECT_LE(dv_gap(lsvm, svm, probe(2, seed)), 1e-3);
    }
}
