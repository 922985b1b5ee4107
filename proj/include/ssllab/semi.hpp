#pragma once

#include "ssllab/core.hpp"
#include "ssllab/graph.hpp"
#include "ssllab/optim.hpp"
#include "ssllab/supervised.hpp"

#include <functional>
#include <vector>

namespace ssllab {

using SupervisedTrainer = std::function<Fit(const Matrix& Xl, Labels yl)>;

// Retrains the base learner on labeled data plus its own hard pseudo-labels until the
// pseudo-labels stop changing or max_iter rounds have run.
Fit self_learning(const SupervisedTrainer& base, const Matrix& Xl, Labels yl, const Matrix& Xu, int max_iter = 100);

enum class GaussianFamily { nmc, lda };

double observed_log_likelihood(const GaussianModel& g, const Matrix& Xl, Labels yl, const Matrix& Xu);

// EM from the supervised fit; loglik, when given, receives the observed-data
// log-likelihood of every iterate including the initial one.
Fit train_em_generative(GaussianFamily family, const Matrix& Xl, Labels yl, const Matrix& Xu, double tol = 1e-8,
                        int max_iter = 1000, std::vector<double>* loglik = nullptr);

Fit train_moment_constrained_nmc(const Matrix& Xl, Labels yl, const Matrix& Xu);

Fit train_usm_least_squares(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda);

// Augmented least-squares solution as an affine function of the unlabeled soft labels:
// w(q) = w0 + B q, w = (weights, intercept).
struct ImplicitLeastSquares {
    Vector w0;
    Matrix B;
    Vector weights(const Vector& q) const { return w0 + B * q; }
};

ImplicitLeastSquares implicit_least_squares(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda);
// Mean squared loss of w(q) on the labeled data.
double icls_labeled_loss(const ImplicitLeastSquares& ils, const Matrix& Xl, Labels yl, const Vector& q);

Fit train_icls(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda, const OptimSettings& s = {});
Fit train_icls_projection(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda, const OptimSettings& s = {});

// Logistic objective plus lambda_entropy * mean entropy of the unlabeled predictions.
Objective erlr_objective(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda_entropy, double lambda_ridge);
Fit train_erlr(const Matrix& Xl, Labels yl, const Matrix& Xu, double lambda_entropy, double lambda_ridge,
               const OptimSettings& s = {});

struct LapParams {
    double lambda = 1e-4;
    double gamma = 10.0;
    void validate() const;
};

// Closed form with an unpenalized bias b on the stacked points (labeled first):
//   (J K + lambda n_l I + gamma n_l / n^2 L K) alpha + J 1 b = J y
//   1' J K alpha + n_l b = 1' J y
// b = 0 drops the second row and gives the bias-free form.
Fit train_laplacian_rls(const Matrix& Xl, Labels yl, const Matrix& Xu, const KernelSpec& kernel, const LapParams& p,
                        const GraphConfig& graph);

Fit train_laplacian_svm(const Matrix& Xl, Labels yl, const Matrix& Xu, const KernelSpec& kernel, const LapParams& p,
                        const GraphConfig& graph, const OptimSettings& s = {});

}  // namespace ssllab
