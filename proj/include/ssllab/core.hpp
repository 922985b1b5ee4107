#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ssllab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : Error { using Error::Error; };
struct EncodingError : Error { using Error::Error; };
struct SingularMatrixError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct ConnectivityError : Error { using Error::Error; };
struct CapabilityError : Error { using Error::Error; };
struct DegenerateBoundaryError : Error { using Error::Error; };
struct MissingClassError : Error { using Error::Error; };
struct ProvenanceError : Error { using Error::Error; };
struct InfeasibleError : Error { using Error::Error; };
// Bad flags, configuration or file layout; the CLI maps it to exit code 2.
struct ConfigError : Error { using Error::Error; };

using ClassOrder = std::array<std::string, 2>;

// Labels are stored as indices into class_order; nullopt marks an unlabeled row.
struct Dataset {
    Matrix X;
    std::vector<std::optional<int>> y;
    ClassOrder class_order{"A", "B"};

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t labeled_count() const;
    // Throws if labels and rows disagree, a label is out of range or a feature is not finite.
    void validate() const;
};

enum class Target { zero_one, pm_one };

Vector encode(std::span<const int> y, Target target);
Vector encode_labels(const std::vector<std::string>& labels, const ClassOrder& order, Target target);
std::vector<std::string> decode_labels(std::span<const int> codes, const ClassOrder& order);
int class_index(const std::string& name, const ClassOrder& order);

struct KernelSpec {
    enum class Family { linear, rbf };
    Family family = Family::linear;
    double sigma = 1.0;  // k(x,z) = exp(-sigma |x-z|^2)

    static KernelSpec linear() { return {Family::linear, 1.0}; }
    static KernelSpec rbf(double sigma) { return {Family::rbf, sigma}; }
    void validate() const;
};

std::string to_string(KernelSpec::Family f);
Matrix gram_matrix(const KernelSpec& spec, const Matrix& A, const Matrix& B);

struct LabeledSplit {
    Matrix Xl;
    std::vector<int> yl;
    Matrix Xu;
    std::vector<std::size_t> labeled_rows;
    std::vector<std::size_t> unlabeled_rows;
};

LabeledSplit split_labeled_unlabeled(const Dataset& d);

Matrix select_rows(const Matrix& X, std::span<const std::size_t> rows);
Matrix stack_rows(const Matrix& top, const Matrix& bottom);

// Model families.

struct LinearModel {
    enum class Link { identity, logistic };
    Vector w;
    double b = 0.0;
    Link link = Link::identity;
};

struct KernelModel {
    enum class Loss { squared, squared_hinge };
    Vector alpha;
    double bias = 0.0;
    Matrix support;
    KernelSpec kernel;
    Target scale = Target::zero_one;
    Loss loss = Loss::squared;
};

struct GaussianModel {
    std::array<double, 2> priors{0.5, 0.5};
    Matrix means;       // 2 x d
    Matrix covariance;  // d x d
    bool spherical = false;
    bool floored = false;  // variance floor was applied
};

using Params = std::variant<LinearModel, KernelModel, GaussianModel>;

struct TrainingMeta {
    bool converged = true;
    int iterations = 0;
    std::uint64_t seed = 0;
};

struct Fit {
    Params params;
    std::optional<Vector> responsibilities;
    TrainingMeta meta;
};

struct TrainedModel {
    std::string tag;
    ClassOrder class_order{"A", "B"};
    Params params;
    std::optional<Vector> responsibilities;
    TrainingMeta meta;
};

Eigen::Index input_dim(const Params& p);

// Positive values mean class_order[1].
Vector decision_values(const Params& p, const Matrix& X);
std::vector<int> predict_codes(const Params& p, const Matrix& X);
Vector loss(const Params& p, const Matrix& X, std::span<const int> y);
double mean_loss(const Params& p, const Matrix& X, std::span<const int> y);
// Probability of class_order[1] where the family has one; otherwise hard 0/1.
Vector class1_scores(const Params& p, const Matrix& X);

Vector decision_values(const TrainedModel& m, const Matrix& X);
std::vector<std::string> predict(const TrainedModel& m, const Matrix& X);
Vector loss(const TrainedModel& m, const Matrix& X, const std::vector<std::string>& y);

struct Line {
    bool vertical = false;
    double intercept = 0.0;  // x2 = intercept + slope * x1
    double slope = 0.0;
    double x1 = 0.0;         // vertical form x1 = const
};

Line line_coefficients(const Params& p);

}  // namespace ssllab
