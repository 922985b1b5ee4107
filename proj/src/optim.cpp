#include "ssllab/optim.hpp"

#include <algorithm>
#include <cmath>

namespace ssllab {

namespace {

constexpr double min_step = 1e-20;
constexpr double max_step = 1e20;

double eval_checked(const Objective& f, const Vector& x, Vector* g, int iter) {
    const double v = f(x, g);
    if (!std::isfinite(v) || (g && !g->allFinite())) {
        throw NumericalError("non-finite objective or gradient at iterate " + std::to_string(iter));
    }
    return v;
}

double bb_step(const Vector& s, const Vector& y, double fallback) {
    const double sy = s.dot(y);
    if (!(sy > 0.0)) return fallback;
    return std::clamp(s.squaredNorm() / sy, min_step, max_step);
}

Vector clamp(const Vector& x, const Vector& lo, const Vector& hi) { return x.cwiseMax(lo).cwiseMin(hi); }

double projected_gradient_norm(const Vector& x, const Vector& g, const Vector& lo, const Vector& hi) {
    if (x.size() == 0) return 0.0;
    return (x - clamp(x - g, lo, hi)).lpNorm<Eigen::Infinity>();
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace

void OptimSettings::validate() const {
    if (max_iter < 0) throw ArgumentError("max_iter must be nonnegative");
    if (!(grad_tol > 0.0)) throw ArgumentError("grad_tol must be positive");
    if (!(initial_step > 0.0)) throw ArgumentError("initial_step must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw ArgumentError("backtrack_factor must lie in (0,1)");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
        throw ArgumentError("sufficient_decrease must lie in (0,1)");
    }
}

OptimResult minimize(const Objective& f, const Vector& x0, const OptimSettings& s) {
    s.validate();
    OptimResult r;
    r.x = x0;
    Vector g(x0.size());
    r.value = eval_checked(f, r.x, &g, 0);
    r.history.push_back(r.value);
    double step = s.initial_step;
    for (int it = 0; it < s.max_iter; ++it) {
        if (inf_norm(g) <= s.grad_tol) break;
        const double gg = g.squaredNorm();
        bool accepted = false;
        Vector xn;
        double fn = 0.0;
        for (double t = step; t >= min_step; t *= s.backtrack_factor) {
            xn = r.x - t * g;
            fn = f(xn, nullptr);
            if (std::isfinite(fn) && fn <= r.value - s.sufficient_decrease * t * gg) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        Vector gn(x0.size());
        fn = eval_checked(f, xn, &gn, it + 1);
        step = bb_step(xn - r.x, gn - g, s.initial_step);
        r.x = std::move(xn);
        r.value = fn;
        g = std::move(gn);
        r.history.push_back(r.value);
        r.iterations = it + 1;
    }
    r.converged = inf_norm(g) <= s.grad_tol;
    return r;
}

OptimResult minimize_box(const Objective& f, const Vector& x0, const Vector& lower, const Vector& upper,
                         const OptimSettings& s) {
    s.validate();
    if (lower.size() != x0.size() || upper.size() != x0.size()) throw ShapeError("minimize_box: bound sizes differ");
    if ((lower.array() > upper.array()).any()) throw ArgumentError("minimize_box: lower bound exceeds upper bound");
    OptimResult r;
    r.x = clamp(x0, lower, upper);
    Vector g(x0.size());
    r.value = eval_checked(f, r.x, &g, 0);
    r.history.push_back(r.value);
    double step = s.initial_step;
    for (int it = 0; it < s.max_iter; ++it) {
        if (projected_gradient_norm(r.x, g, lower, upper) <= s.grad_tol) break;
        bool accepted = false;
        Vector xn;
        double fn = 0.0;
        for (double t = step; t >= min_step; t *= s.backtrack_factor) {
            xn = clamp(r.x - t * g, lower, upper);
            const double decrease = g.dot(xn - r.x);
            if (decrease >= 0.0) continue;
            fn = f(xn, nullptr);
            if (std::isfinite(fn) && fn <= r.value + s.sufficient_decrease * decrease) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        Vector gn(x0.size());
        fn = eval_checked(f, xn, &gn, it + 1);
        step = bb_step(xn - r.x, gn - g, s.initial_step);
        r.x = std::move(xn);
        r.value = fn;
        g = std::move(gn);
        r.history.push_back(r.value);
        r.iterations = it + 1;
    }
    r.converged = projected_gradient_norm(r.x, g, lower, upper) <= s.grad_tol;
    return r;
}

OptimResult minimize_box_least_squares(const Matrix& G, const Vector& h, const Vector& x0, const Vector& lower,
                                       const Vector& upper, const OptimSettings& s) {
    if (G.rows() != h.size() || G.cols() != x0.size()) throw ShapeError("minimize_box_least_squares: shape mismatch");
    const Objective f = [&](const Vector& x, Vector* grad) {
        const Vector res = G * x - h;
        if (grad) *grad = 2.0 * (G.transpose() * res);
        return res.squaredNorm();
    };
    OptimResult r = minimize_box(f, x0, lower, upper, s);
    int total = r.iterations;
    for (int round = 0; round < 8 && r.x.size() > 0; ++round) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < r.x.size(); ++i) {
            if (r.x[i] > lower[i] && r.x[i] < upper[i]) free.push_back(i);
        }
        if (free.empty()) break;
        Matrix GF(G.rows(), static_cast<Eigen::Index>(free.size()));
        for (std::size_t j = 0; j < free.size(); ++j) GF.col(static_cast<Eigen::Index>(j)) = G.col(free[j]);
        const Vector res = G * r.x - h;
        const Vector delta = GF.completeOrthogonalDecomposition().solve(-res);
        Vector trial = r.x;
        for (std::size_t j = 0; j < free.size(); ++j) trial[free[j]] += delta[static_cast<Eigen::Index>(j)];
        trial = clamp(trial, lower, upper);
        const double ft = f(trial, nullptr);
        if (!(ft < r.value)) break;
        // Re-enter projected gradient from the refined point; clamping may have moved off the face.
        OptimResult next = minimize_box(f, trial, lower, upper, s);
        total += next.iterations + 1;
        r.history.push_back(ft);
        r.history.insert(r.history.end(), next.history.begin() + 1, next.history.end());
        r.x = std::move(next.x);
        r.value = next.value;
        r.converged = next.converged;
    }
    r.iterations = total;
    return r;
}

Matrix solve_linear(const Matrix& A, const Matrix& B) {
    if (A.rows() != A.cols()) throw ShapeError("solve_linear: matrix is not square");
    if (B.rows() != A.rows()) throw ShapeError("solve_linear: right-hand side rows do not match");
    if (!A.allFinite() || !B.allFinite()) throw NumericalError("solve_linear: non-finite input");
    if (A.rows() == 0) return Matrix(0, B.cols());
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible()) {
        throw SingularMatrixError("matrix is singular to working precision; add regularization");
    }
    Matrix X = lu.solve(B);
    if (!X.allFinite()) throw SingularMatrixError("matrix is singular to working precision; add regularization");
    return X;
}

Matrix solve_linear_jitter(const Matrix& A, const Matrix& B, const std::string& advice) {
    try {
        return solve_linear(A, B);
    } catch (const SingularMatrixError&) {
        const double n = static_cast<double>(std::max<Eigen::Index>(A.rows(), 1));
        const double jitter = 1e-10 * A.trace() / n;
        if (!(jitter > 0.0)) throw SingularMatrixError("singular system; " + advice);
        Matrix Aj = A;
        Aj.diagonal().array() += jitter;
        try {
            return solve_linear(Aj, B);
        } catch (const SingularMatrixError&) {
            throw SingularMatrixError("singular system; " + advice);
        }
    }
}

double check_gradient(const Objective& f, const Vector& x, double h) {
    Vector g(x.size());
    const double f0 = f(x, &g);
    if (!std::isfinite(f0) || !g.allFinite()) throw NumericalError("check_gradient: non-finite evaluation");
    double worst = 0.0;
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        xp[i] = xi + h;
        const double fp = f(xp, nullptr);
        xp[i] = xi - h;
        const double fm = f(xp, nullptr);
        xp[i] = xi;
        if (!std::isfinite(fp) || !std::isfinite(fm)) throw NumericalError("check_gradient: non-finite evaluation");
        const double gn = (fp - fm) / (2.0 * h);
        worst = std::max(worst, std::abs(g[i] - gn) / (1.0 + std::abs(gn)));
    }
    return worst;
}

}  // namespace ssllab
