#include "ssllab/core.hpp"

#include <cmath>
#include <numbers>

namespace ssllab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_dim(const Params& p, const Matrix& X) {
    if (X.cols() != input_dim(p)) {
        throw ShapeError("expected " + std::to_string(input_dim(p)) + " feature columns, got " +
                         std::to_string(X.cols()));
    }
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct GaussianTerms {
    Eigen::LLT<Matrix> llt;
    double log_det = 0.0;
};

GaussianTerms gaussian_terms(const GaussianModel& g) {
    GaussianTerms t{Eigen::LLT<Matrix>(g.covariance), 0.0};
    if (t.llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    t.log_det = 2.0 * t.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return t;
}

// Rows: log pi_c + log N(x; mu_c, Sigma) for c = 0, 1.
Matrix log_joint(const GaussianModel& g, const Matrix& X) {
    const auto t = gaussian_terms(g);
    const double d = static_cast<double>(X.cols());
    Matrix out(X.rows(), 2);
    for (int c = 0; c < 2; ++c) {
        Matrix diff = X.rowwise() - g.means.row(c);
        Matrix z = t.llt.matrixL().solve(diff.transpose());
        Vector maha = z.colwise().squaredNorm().transpose();
        out.col(c) = (-0.5 * maha.array() - 0.5 * t.log_det - 0.5 * d * std::log(2.0 * std::numbers::pi) +
                      std::log(g.priors[static_cast<std::size_t>(c)]))
                         .matrix();
    }
    return out;
}

}  // namespace

std::size_t Dataset::labeled_count() const {
    std::size_t n = 0;
    for (const auto& l : y) n += l.has_value();
    return n;
}

void Dataset::validate() const {
    if (y.size() != rows()) {
        throw ShapeError("label count " + std::to_string(y.size()) + " does not match row count " +
                         std::to_string(rows()));
    }
    if (class_order[0] == class_order[1]) throw EncodingError("class_order entries must be distinct");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] && (*y[i] < 0 || *y[i] > 1)) {
            throw EncodingError("label index out of range at row " + std::to_string(i));
        }
    }
    if (!X.allFinite()) throw NumericalError("non-finite feature value");
}

Vector encode(std::span<const int> y, Target target) {
    Vector out(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw EncodingError("label code must be 0 or 1");
        const double v = static_cast<double>(y[i]);
        out[static_cast<Eigen::Index>(i)] = target == Target::zero_one ? v : 2.0 * v - 1.0;
    }
    return out;
}

int class_index(const std::string& name, const ClassOrder& order) {
    if (name == order[0]) return 0;
    if (name == order[1]) return 1;
    throw EncodingError("unknown class " + name);
}

Vector encode_labels(const std::vector<std::string>& labels, const ClassOrder& order, Target target) {
    std::vector<int> codes;
    codes.reserve(labels.size());
    for (const auto& l : labels) codes.push_back(class_index(l, order));
    return encode(codes, target);
}

std::vector<std::string> decode_labels(std::span<const int> codes, const ClassOrder& order) {
    std::vector<std::string> out;
    out.reserve(codes.size());
    for (int c : codes) {
        if (c != 0 && c != 1) throw EncodingError("label code must be 0 or 1");
        out.push_back(order[static_cast<std::size_t>(c)]);
    }
    return out;
}

void KernelSpec::validate() const {
    if (family == Family::rbf && !(sigma > 0.0 && std::isfinite(sigma))) {
        throw ArgumentError("rbf kernel requires sigma > 0");
    }
}

std::string to_string(KernelSpec::Family f) { return f == KernelSpec::Family::rbf ? "rbf" : "linear"; }

Matrix gram_matrix(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols()) {
        throw ShapeError("gram_matrix: column counts differ (" + std::to_string(A.cols()) + " vs " +
                         std::to_string(B.cols()) + ")");
    }
    spec.validate();
    Matrix G = A * B.transpose();
    if (spec.family == KernelSpec::Family::linear) return G;
    const Vector a2 = A.rowwise().squaredNorm();
    const Vector b2 = B.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        for (Eigen::Index j = 0; j < G.cols(); ++j) {
            const double d2 = std::max(0.0, a2[i] + b2[j] - 2.0 * G(i, j));
            G(i, j) = std::exp(-spec.sigma * d2);
        }
    }
    if (&A == &B || (A.rows() == B.rows() && A == B)) {
        G = 0.5 * (G + G.transpose()).eval();
        G.diagonal().setOnes();
    }
    return G;
}

Matrix select_rows(const Matrix& X, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
    if (top.rows() == 0) return bottom;
    if (bottom.rows() == 0) return top;
    if (top.cols() != bottom.cols()) throw ShapeError("stack_rows: column counts differ");
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

LabeledSplit split_labeled_unlabeled(const Dataset& d) {
    LabeledSplit s;
    for (std::size_t i = 0; i < d.y.size(); ++i) {
        if (d.y[i]) {
            s.labeled_rows.push_back(i);
            s.yl.push_back(*d.y[i]);
        } else {
            s.unlabeled_rows.push_back(i);
        }
    }
    s.Xl = select_rows(d.X, s.labeled_rows);
    s.Xu = select_rows(d.X, s.unlabeled_rows);
    return s;
}

Eigen::Index input_dim(const Params& p) {
    return std::visit(overloaded{
                          [](const LinearModel& m) { return m.w.size(); },
                          [](const KernelModel& m) { return m.support.cols(); },
                          [](const GaussianModel& m) { return m.means.cols(); },
                      },
                      p);
}

Vector decision_values(const Params& p, const Matrix& X) {
    require_dim(p, X);
    return std::visit(overloaded{
                          [&](const LinearModel& m) -> Vector {
                              Vector raw = (X * m.w).array() + m.b;
                              if (m.link == LinearModel::Link::identity) raw.array() -= 0.5;
                              return raw;
                          },
                          [&](const KernelModel& m) -> Vector {
                              Vector f = gram_matrix(m.kernel, X, m.support) * m.alpha;
                              f.array() += m.bias;
                              if (m.scale == Target::zero_one) f.array() -= 0.5;
                              return f;
                          },
                          [&](const GaussianModel& m) -> Vector {
                              Matrix lj = log_joint(m, X);
                              return lj.col(1) - lj.col(0);
                          },
                      },
                      p);
}

std::vector<int> predict_codes(const Params& p, const Matrix& X) {
    const Vector v = decision_values(p, X);
    std::vector<int> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v[i] > 0.0 ? 1 : 0;
    return out;
}

Vector loss(const Params& p, const Matrix& X, std::span<const int> y) {
    require_dim(p, X);
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw ShapeError("loss: label count does not match rows");
    return std::visit(overloaded{
                          [&](const LinearModel& m) -> Vector {
                              const Vector z = (X * m.w).array() + m.b;
                              const Vector t = encode(y, Target::zero_one);
                              if (m.link == LinearModel::Link::identity) return (z - t).array().square();
                              Vector out(z.size());
                              for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = softplus(z[i]) - t[i] * z[i];
                              return out;
                          },
                          [&](const KernelModel& m) -> Vector {
                              Vector f = gram_matrix(m.kernel, X, m.support) * m.alpha;
                              f.array() += m.bias;
                              const Vector t = encode(y, m.scale);
                              if (m.loss == KernelModel::Loss::squared) return (f - t).array().square();
                              return (1.0 - t.array() * f.array()).max(0.0).square();
                          },
                          [&](const GaussianModel& m) -> Vector {
                              const Matrix lj = log_joint(m, X);
                              Vector out(X.rows());
                              for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = -lj(i, y[static_cast<std::size_t>(i)]);
                              return out;
                          },
                      },
                      p);
}

double mean_loss(const Params& p, const Matrix& X, std::span<const int> y) {
    if (X.rows() == 0) throw ArgumentError("mean loss over an empty set");
    return loss(p, X, y).mean();
}

Vector class1_scores(const Params& p, const Matrix& X) {
    const Vector v = decision_values(p, X);
    const bool probabilistic =
        std::holds_alternative<GaussianModel>(p) ||
        (std::holds_alternative<LinearModel>(p) && std::get<LinearModel>(p).link == LinearModel::Link::logistic);
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[i] = probabilistic ? 1.0 / (1.0 + std::exp(-v[i])) : (v[i] > 0.0 ? 1.0 : 0.0);
    }
    return out;
}

Vector decision_values(const TrainedModel& m, const Matrix& X) { return decision_values(m.params, X); }

std::vector<std::string> predict(const TrainedModel& m, const Matrix& X) {
    const auto codes = predict_codes(m.params, X);
    return decode_labels(codes, m.class_order);
}

Vector loss(const TrainedModel& m, const Matrix& X, const std::vector<std::string>& y) {
    std::vector<int> codes;
    codes.reserve(y.size());
    for (const auto& s : y) codes.push_back(class_index(s, m.class_order));
    return loss(m.params, X, codes);
}

Line line_coefficients(const Params& p) {
    if (input_dim(p) != 2) throw CapabilityError("line coefficients need a model on 2 features");
    double w1 = 0, w2 = 0, c = 0;  // boundary w1 x1 + w2 x2 + c = 0
    std::visit(overloaded{
                   [&](const LinearModel& m) {
                       w1 = m.w[0];
                       w2 = m.w[1];
                       c = m.b - (m.link == LinearModel::Link::identity ? 0.5 : 0.0);
                   },
                   [&](const KernelModel& m) {
                       if (m.kernel.family != KernelSpec::Family::linear) {
                           throw CapabilityError("line coefficients are undefined for a non-linear kernel");
                       }
                       const Vector w = m.support.transpose() * m.alpha;
                       w1 = w[0];
                       w2 = w[1];
                       c = m.bias - (m.scale == Target::zero_one ? 0.5 : 0.0);
                   },
                   [&](const GaussianModel& m) {
                       Eigen::LLT<Matrix> llt(m.covariance);
                       if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
                       const Vector mu0 = m.means.row(0).transpose();
                       const Vector mu1 = m.means.row(1).transpose();
                       const Vector w = llt.solve(mu1 - mu0);
                       w1 = w[0];
                       w2 = w[1];
                       c = -0.5 * (mu1.dot(llt.solve(mu1)) - mu0.dot(llt.solve(mu0))) +
                           std::log(m.priors[1] / m.priors[0]);
                   },
               },
               p);
    Line line;
    if (w2 != 0.0) {
        line.intercept = -c / w2;
        line.slope = -w1 / w2;
    } else if (w1 != 0.0) {
        line.vertical = true;
        line.x1 = -c / w1;
    } else {
        throw DegenerateBoundaryError("weight vector is zero; no decision boundary");
    }
    return line;
}

}  // namespace ssllab
