#include "ssllab/graph.hpp"

#include "ssllab/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace ssllab {

namespace {

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

}  // namespace

Graph build_graph(const Matrix& X, const GraphConfig& cfg) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw ArgumentError("graph needs at least 2 points");
    const bool knn = cfg.adjacency == GraphConfig::Adjacency::knn;
    if (knn && (cfg.k < 1 || cfg.k >= n)) throw ArgumentError("knn graph needs 1 <= k < n");
    if (cfg.weight_sigma && !(*cfg.weight_sigma > 0.0)) throw ArgumentError("weight_sigma must be positive");

    Matrix D2 = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) D2(i, j) = D2(j, i) = (X.row(i) - X.row(j)).squaredNorm();
    }

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> edge(n, n);
    edge.setConstant(!knn);
    edge.diagonal().setConstant(false);
    if (knn) {
        std::vector<Eigen::Index> order;
        for (Eigen::Index i = 0; i < n; ++i) {
            order.clear();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j != i) order.push_back(j);
            }
            std::partial_sort(order.begin(), order.begin() + cfg.k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return D2(i, a) < D2(i, b) || (D2(i, a) == D2(i, b) && a < b);
            });
            for (int j = 0; j < cfg.k; ++j) edge(i, order[static_cast<std::size_t>(j)]) = true;
        }
    }

    Graph g;
    if (cfg.weight_sigma) {
        g.weight_sigma = *cfg.weight_sigma;
    } else {
        std::vector<double> dist;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (edge(i, j) && (knn || j > i)) dist.push_back(std::sqrt(D2(i, j)));
            }
        }
        const double m = median(dist);
        if (!(m > 0.0)) throw ArgumentError("median edge distance is zero; set weight_sigma explicitly");
        g.weight_sigma = 1.0 / (2.0 * m * m);
    }

    Matrix W = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (edge(i, j)) W(i, j) = std::exp(-g.weight_sigma * D2(i, j));
        }
    }
    if (knn) {
        const Matrix Wt = W.transpose();
        if (cfg.symmetrize) {
            W = W.cwiseMax(Wt);
        } else {
            W = W.cwiseMin(Wt);
        }
    }
    g.W = std::move(W);
    g.degrees = g.W.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(g.degrees[i] > 0.0)) throw ConnectivityError("vertex " + std::to_string(i) + " is isolated");
    }
    if (cfg.normalized_laplacian) {
        const Vector s = g.degrees.array().rsqrt();
        g.L = Matrix::Identity(n, n) - s.asDiagonal() * g.W * s.asDiagonal();
    } else {
        g.L = Matrix(g.degrees.asDiagonal()) - g.W;
    }
    return g;
}

Vector harmonic_energy_min(const Graph& g, std::span<const std::size_t> labeled, const Vector& f_l,
                           std::span<const std::size_t> unlabeled) {
    const auto n = static_cast<std::size_t>(g.W.rows());
    if (labeled.empty()) throw ArgumentError("harmonic solution needs a labeled vertex");
    if (labeled.size() != static_cast<std::size_t>(f_l.size())) throw ShapeError("f_l length does not match labeled set");
    if (labeled.size() + unlabeled.size() != n) throw ArgumentError("labeled and unlabeled sets must partition the vertices");
    std::vector<int> role(n, -1);
    for (auto i : labeled) {
        if (i >= n || role[i] != -1) throw ArgumentError("labeled and unlabeled sets must partition the vertices");
        role[i] = 0;
    }
    for (auto i : unlabeled) {
        if (i >= n || role[i] != -1) throw ArgumentError("labeled and unlabeled sets must partition the vertices");
        role[i] = 1;
    }
    if (unlabeled.empty()) return Vector(0);

    std::vector<char> reached(n, 0);
    std::deque<std::size_t> queue(labeled.begin(), labeled.end());
    for (auto i : labeled) reached[i] = 1;
    while (!queue.empty()) {
        const auto i = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < n; ++j) {
            if (!reached[j] && g.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
                reached[j] = 1;
                queue.push_back(j);
            }
        }
    }
    for (auto i : unlabeled) {
        if (!reached[i]) throw ConnectivityError("vertex " + std::to_string(i) + " is not connected to any labeled vertex");
    }

    const auto nu = static_cast<Eigen::Index>(unlabeled.size());
    const auto nl = static_cast<Eigen::Index>(labeled.size());
    Matrix Luu(nu, nu);
    Matrix Wul(nu, nl);
    for (Eigen::Index a = 0; a < nu; ++a) {
        const auto i = static_cast<Eigen::Index>(unlabeled[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < nu; ++b) Luu(a, b) = -g.W(i, static_cast<Eigen::Index>(unlabeled[static_cast<std::size_t>(b)]));
        Luu(a, a) += g.degrees[i];
        for (Eigen::Index b = 0; b < nl; ++b) Wul(a, b) = g.W(i, static_cast<Eigen::Index>(labeled[static_cast<std::size_t>(b)]));
    }
    try {
        return solve_linear(Luu, Wul * f_l);
    } catch (const SingularMatrixError&) {
        throw ConnectivityError("unlabeled block of the Laplacian is singular (disconnected component)");
    }
}

}  // namespace ssllab
