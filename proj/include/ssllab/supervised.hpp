#pragma once

#include "ssllab/core.hpp"
#include "ssllab/optim.hpp"

#include <span>

namespace ssllab {

using Labels = std::span<const int>;

// Appends a column of ones.
Matrix augment(const Matrix& X);
void require_both_classes(Labels y);
void require_rows(const Matrix& X, Labels y);

// argmin |Xw + b - y01|^2 / n + lambda |w|^2, intercept unpenalized.
Fit train_least_squares(const Matrix& Xl, Labels yl, double lambda);
// Normal-equation pieces shared with the semi-supervised least-squares variants.
Matrix least_squares_penalty(Eigen::Index d, double lambda, double n);

// Same objective in representer form: f(x) = sum alpha_i k(x_i, x) + bias, bias unpenalized.
Fit train_kernel_least_squares(const Matrix& Xl, Labels yl, const KernelSpec& kernel, double lambda);

Fit train_nearest_mean(const Matrix& Xl, Labels yl);
Fit train_lda(const Matrix& Xl, Labels yl, double reg = 0.0);

// Mean negative log-likelihood + lambda |w|^2 over theta = (w, b).
Objective logistic_objective(const Matrix& X, Labels y, double lambda);
Fit train_logistic(const Matrix& Xl, Labels yl, double lambda, const OptimSettings& s = {});

// Squared-hinge representer objective over theta = (alpha, b) with f = K alpha + b:
//   (1/n_l) sum_{i < n_l} max(0, 1 - y_i f_i)^2 + lambda alpha' K alpha + (gamma / n^2) f' L f
// Labeled points occupy the first n_l rows of K. L may be empty when gamma = 0.
struct SquaredHingeProblem {
    const Matrix& K;
    Vector y;  // +-1, length n_l
    double lambda = 0.0;
    double gamma = 0.0;
    const Matrix* L = nullptr;
};

Objective squared_hinge_objective(const SquaredHingeProblem& p);
// Newton active-set iteration on the piecewise quadratic objective.
OptimResult solve_squared_hinge(const SquaredHingeProblem& p, const OptimSettings& s = {});

// (1/(2 C n_l)) alpha' K alpha + (1/n_l) sum max(0, 1 - y f)^2.
Objective svm_objective(const Matrix& K, Labels y, double C);
Fit train_svm(const Matrix& Xl, Labels yl, const KernelSpec& kernel, double C, const OptimSettings& s = {});

}  // namespace ssllab
