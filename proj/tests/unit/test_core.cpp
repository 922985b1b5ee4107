#include "ssllab/core.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ssllab;

namespace {

const ClassOrder ab{"A", "B"};

LinearModel ls_model(Vector w, double b) {
    LinearModel m;
    m.w = std::move(w);
    m.b = b;
    return m;
}

Matrix col(std::initializer_list<double> v) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

}  // namespace

TEST(Encoding, ZeroOneAndPmOne) {
    const Vector a = encode_labels({"A", "B", "A"}, ab, Target::zero_one);
    EXPECT_EQ(a, (Vector(3) << 0, 1, 0).finished());
    const Vector b = encode_labels({"A", "B"}, ab, Target::pm_one);
    EXPECT_EQ(b, (Vector(2) << -1, 1).finished());
}

TEST(Encoding, UnknownClassNamesTheLabel) {
    try {
        encode_labels({"C"}, ab, Target::zero_one);
        FAIL() << "expected EncodingError";
    } catch (const EncodingError& e) {
        EXPECT_STREQ(e.what(), "unknown class C");
    }
}

TEST(Encoding, DecodeInvertsEncode) {
    const std::vector<std::string> labels{"B", "A", "A", "B", "B"};
    std::vector<int> codes;
    for (const auto& l : labels) codes.push_back(class_index(l, ab));
    EXPECT_EQ(decode_labels(codes, ab), labels);
}

TEST(Gram, RbfAndLinearExamples) {
    Matrix x(1, 2), z(1, 2);
    x << 0, 0;
    z << 1, 0;
    EXPECT_DOUBLE_EQ(gram_matrix(KernelSpec::rbf(0.05), x, x)(0, 0), 1.0);
    EXPECT_NEAR(gram_matrix(KernelSpec::rbf(0.05), x, z)(0, 0), 0.951229, 1e-6);
    Matrix p(1, 2), q(1, 2);
    p << 1, 2;
    q << 3, 4;
    EXPECT_DOUBLE_EQ(gram_matrix(KernelSpec::linear(), p, q)(0, 0), 11.0);
}

TEST(Gram, ShapeMismatchAndBadSigma) {
    EXPECT_THROW(gram_matrix(KernelSpec::linear(), Matrix::Zero(2, 2), Matrix::Zero(2, 3)), ShapeError);
    EXPECT_THROW(gram_matrix(KernelSpec::rbf(0.0), Matrix::Zero(2, 2), Matrix::Zero(2, 2)), ArgumentError);
}

TEST(Gram, SymmetricPositiveSemidefinite) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Matrix A = testutil::random_matrix(static_cast<Eigen::Index>(10 * seed), 3, seed);
        for (const auto& spec : {KernelSpec::linear(), KernelSpec::rbf(0.5)}) {
            const Matrix G = gram_matrix(spec, A, A);
            EXPECT_LE((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-10);
            Eigen::SelfAdjointEigenSolver<Matrix> es(G);
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
            // direct evaluation of one entry
            const double d2 = (A.row(0) - A.row(1)).squaredNorm();
            const double expect = spec.family == KernelSpec::Family::rbf ? std::exp(-0.5 * d2) : A.row(0).dot(A.row(1));
            EXPECT_NEAR(G(0, 1), expect, 1e-12);
        }
    }
}

TEST(Split, PartitionsByLabelPresence) {
    Dataset d;
    d.X = col({1, 2, 3});
    d.y = {0, std::nullopt, 1};
    const auto s = split_labeled_unlabeled(d);
    EXPECT_EQ(s.labeled_rows, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(s.unlabeled_rows, (std::vector<std::size_t>{1}));
    EXPECT_EQ(s.Xl(1, 0), 3.0);
    EXPECT_EQ(s.Xu(0, 0), 2.0);
    EXPECT_EQ(s.yl, (std::vector<int>{0, 1}));

    d.y = {0, 1, 0};
    EXPECT_EQ(split_labeled_unlabeled(d).Xu.rows(), 0);
    d.y = {std::nullopt, std::nullopt, std::nullopt};
    EXPECT_EQ(split_labeled_unlabeled(d).Xl.rows(), 0);
}

TEST(Dataset, ValidateCatchesBadInput) {
    Dataset d;
    d.X = col({1, 2});
    d.y = {0};
    EXPECT_THROW(d.validate(), ShapeError);
    d.y = {0, 2};
    EXPECT_THROW(d.validate(), EncodingError);
    d.y = {0, 1};
    d.X(0, 0) = std::nan("");
    EXPECT_THROW(d.validate(), NumericalError);
}

TEST(Predict, ThresholdAndTieRule) {
    TrainedModel m;
    m.class_order = ab;
    m.params = ls_model((Vector(1) << 1).finished(), 0.0);
    EXPECT_EQ(predict(m, col({0.6}))[0], "B");
    EXPECT_EQ(predict(m, col({0.5}))[0], "A");
    EXPECT_DOUBLE_EQ(decision_values(m, col({0.5}))[0], 0.0);
}

TEST(Predict, NearestMeanAndSymmetricGaussian) {
    GaussianModel g;
    g.means.resize(2, 2);
    g.means << 0, 0, 10, 10;
    g.covariance = Matrix::Identity(2, 2);
    g.spherical = true;
    Matrix x(1, 2);
    x << 1, 1;
    EXPECT_EQ(predict_codes(g, x)[0], 0);
    x << 5, 5;
    EXPECT_NEAR(decision_values(g, x)[0], 0.0, 1e-12);
}

TEST(Predict, ConstantKernelModel) {
    KernelModel k;
    k.alpha = Vector::Zero(3);
    k.support = testutil::random_matrix(3, 2, 7);
    k.bias = 0.7;
    k.scale = Target::pm_one;
    k.loss = KernelModel::Loss::squared_hinge;
    k.kernel = KernelSpec::rbf(1.0);
    const Vector v = decision_values(k, testutil::random_matrix(4, 2, 8));
    for (Eigen::Index i = 0; i < v.size(); ++i) EXPECT_DOUBLE_EQ(v[i], 0.7);
}

TEST(Predict, DimensionMismatchThrows) {
    const Params m = ls_model(Vector::Ones(2), 0.0);
    EXPECT_THROW(decision_values(m, Matrix::Zero(1, 3)), ShapeError);
}

TEST(Loss, Examples) {
    const Params m = ls_model((Vector(1) << 1).finished(), 0.0);
    const std::vector<int> zero{0};
    EXPECT_NEAR(loss(m, col({0.8}), zero)[0], 0.64, 1e-15);
    const std::vector<int> one{1};
    EXPECT_DOUBLE_EQ(loss(m, col({1.0}), one)[0], 0.0);

    KernelModel k;
    k.alpha = Vector::Zero(1);
    k.support = col({0});
    k.kernel = KernelSpec::linear();
    k.bias = 2.0;
    k.scale = Target::pm_one;
    k.loss = KernelModel::Loss::squared_hinge;
    EXPECT_DOUBLE_EQ(loss(k, col({3}), one)[0], 0.0);
    k.bias = 0.25;
    EXPECT_DOUBLE_EQ(loss(k, col({3}), one)[0], 0.75 * 0.75);
}

TEST(Loss, LogisticAndGaussianMatchFormulas) {
    LinearModel lr = ls_model((Vector(1) << 2).finished(), -1.0);
    lr.link = LinearModel::Link::logistic;
    const std::vector<int> y{1, 0};
    const Vector l = loss(lr, col({0.3, 0.3}), y);
    const double p = 1.0 / (1.0 + std::exp(-(2 * 0.3 - 1.0)));
    EXPECT_NEAR(l[0], -std::log(p), 1e-12);
    EXPECT_NEAR(l[1], -std::log(1 - p), 1e-12);

    GaussianModel g;
    g.priors = {0.25, 0.75};
    g.means = (Matrix(2, 1) << -1, 2).finished();
    g.covariance = (Matrix(1, 1) << 4).finished();
    const double x = 0.5;
    const Vector lg = loss(g, col({x}), std::vector<int>{1});
    const double expect = -(std::log(0.75) - 0.5 * std::log(2 * M_PI * 4) - (x - 2) * (x - 2) / 8);
    EXPECT_NEAR(lg[0], expect, 1e-12);
}

TEST(Loss, FiniteForEveryFamily) {
    const auto b = testutil::blobs(20, 2, 1.0, 3);
    LinearModel lin = ls_model(Vector::Ones(2), 0.1);
    KernelModel k;
    k.alpha = Vector::Ones(20) * 0.01;
    k.support = b.X;
    k.kernel = KernelSpec::rbf(0.3);
    GaussianModel g;
    g.means = Matrix::Zero(2, 2);
    g.means(1, 0) = 1;
    g.covariance = Matrix::Identity(2, 2);
    for (const Params& p : {Params(lin), Params(k), Params(g)}) EXPECT_TRUE(std::isfinite(mean_loss(p, b.X, b.y)));
}

TEST(Predict, AgreesWithDecisionSignForAllFamilies) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ssllab::Rng rng(seed);
        const Matrix X = testutil::random_matrix(30, 2, seed + 100);
        LinearModel lin = ls_model(testutil::random_matrix(2, 1, seed), rng.normal());
        if (seed % 2) lin.link = LinearModel::Link::logistic;
        KernelModel k;
        k.support = testutil::random_matrix(5, 2, seed + 200);
        k.alpha = testutil::random_matrix(5, 1, seed + 300);
        k.kernel = seed % 3 ? KernelSpec::rbf(0.7) : KernelSpec::linear();
        k.scale = seed % 2 ? Target::pm_one : Target::zero_one;
        GaussianModel g;
        g.means = testutil::random_matrix(2, 2, seed + 400);
        g.covariance = Matrix::Identity(2, 2) * (0.5 + rng.uniform());
        g.priors = {0.3, 0.7};
        for (const Params& p : {Params(lin), Params(k), Params(g)}) {
            const Vector v = decision_values(p, X);
            const auto c = predict_codes(p, X);
            for (Eigen::Index i = 0; i < v.size(); ++i) EXPECT_EQ(c[static_cast<std::size_t>(i)], v[i] > 0.0 ? 1 : 0);
        }
    }
}

TEST(LineCoefficients, HorizontalVerticalDegenerate) {
    auto line = line_coefficients(ls_model((Vector(2) << 0, 1).finished(), 0.0));
    EXPECT_FALSE(line.vertical);
    EXPECT_DOUBLE_EQ(line.intercept, 0.5);
    EXPECT_DOUBLE_EQ(line.slope, 0.0);

    line = line_coefficients(ls_model((Vector(2) << 1, 0).finished(), 0.0));
    EXPECT_TRUE(line.vertical);
    EXPECT_DOUBLE_EQ(line.x1, 0.5);

    EXPECT_THROW(line_coefficients(ls_model(Vector::Zero(2), 0.0)), DegenerateBoundaryError);

    KernelModel k;
    k.support = Matrix::Zero(1, 2);
    k.alpha = Vector::Zero(1);
    k.kernel = KernelSpec::rbf(1.0);
    EXPECT_THROW(line_coefficients(k), CapabilityError);
}

TEST(LineCoefficients, PointsOnLineHaveZeroDecisionValue) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        LinearModel lin = ls_model(testutil::random_matrix(2, 1, seed), 0.3);
        GaussianModel g;
        g.means = testutil::random_matrix(2, 2, seed + 50);
        const Matrix A = testutil::random_matrix(2, 2, seed + 60);
        g.covariance = A * A.transpose() + Matrix::Identity(2, 2);
        g.priors = {0.4, 0.6};
        KernelModel k;
        k.support = testutil::random_matrix(4, 2, seed + 70);
        k.alpha = testutil::random_matrix(4, 1, seed + 80);
        k.kernel = KernelSpec::linear();
        k.bias = 0.2;
        for (const Params& p : {Params(lin), Params(g), Params(k)}) {
            const auto l = line_coefficients(p);
            ASSERT_FALSE(l.vertical);
            Matrix pts(3, 2);
            for (int i = 0; i < 3; ++i) pts.row(i) << i - 1.0, l.intercept + l.slope * (i - 1.0);
            const Vector v = decision_values(p, pts);
            EXPECT_LE(v.cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}
