#pragma once

#include "ssllab/core.hpp"

#include <optional>
#include <span>

namespace ssllab {

struct GraphConfig {
    enum class Adjacency { full_rbf, knn };
    Adjacency adjacency = Adjacency::knn;
    int k = 10;
    // w_ij = exp(-weight_sigma |x_i - x_j|^2). Unset: 1 / (2 median^2) over the distances of
    // the edges the graph keeps (all pairs for full_rbf, the k-nearest pairs for knn).
    std::optional<double> weight_sigma;
    bool symmetrize = true;  // max(w_ij, w_ji); false keeps mutual neighbours only
    bool normalized_laplacian = false;
};

struct Graph {
    Matrix W;
    Vector degrees;
    Matrix L;
    double weight_sigma = 0.0;
};

Graph build_graph(const Matrix& X, const GraphConfig& cfg);

// f_u = solve(L_uu, W_ul f_l) with L_uu = D_uu - W_uu.
Vector harmonic_energy_min(const Graph& g, std::span<const std::size_t> labeled, const Vector& f_l,
                           std::span<const std::size_t> unlabeled);

}  // namespace ssllab
