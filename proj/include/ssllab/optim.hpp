#pragma once

#include "ssllab/core.hpp"

#include <functional>
#include <vector>

namespace ssllab {

struct OptimSettings {
    int max_iter = 1000;
    double grad_tol = 1e-7;  // infinity norm of the (projected) gradient
    double initial_step = 1.0;
    double backtrack_factor = 0.5;
    double sufficient_decrease = 1e-4;

    void validate() const;
};

// Returns f(x); writes the gradient when grad is non-null.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

struct OptimResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // accepted objective values, starting with f(x0)
};

// Gradient descent with Armijo backtracking. The trial step is the Barzilai-Borwein
// step of the previous iteration (initial_step on the first one).
OptimResult minimize(const Objective& f, const Vector& x0, const OptimSettings& s = {});

// Projected gradient on lower <= x <= upper with elementwise clamping.
OptimResult minimize_box(const Objective& f, const Vector& x0, const Vector& lower, const Vector& upper,
                         const OptimSettings& s = {});

// min |G x - h|^2 on a box. Runs minimize_box, then refines the free face with a
// minimum-norm least-squares step; keeps the refinement only if it lowers the objective.
OptimResult minimize_box_least_squares(const Matrix& G, const Vector& h, const Vector& x0, const Vector& lower,
                                       const Vector& upper, const OptimSettings& s = {});

// Pivoted LU; throws SingularMatrixError when A is singular to working precision.
Matrix solve_linear(const Matrix& A, const Matrix& B);

// solve_linear, retried once with 1e-10 * trace(A)/dim added to the diagonal.
Matrix solve_linear_jitter(const Matrix& A, const Matrix& B, const std::string& advice);

// Max over coordinates of |g_analytic - g_numeric| / (1 + |g_numeric|), central differences.
double check_gradient(const Objective& f, const Vector& x, double h = 1e-6);

}  // namespace ssllab
