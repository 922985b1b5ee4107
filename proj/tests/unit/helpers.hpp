#pragma once

#include "ssllab/core.hpp"
#include "ssllab/rng.hpp"

#include <vector>

namespace testutil {

inline ssllab::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
    ssllab::Rng rng(seed);
    ssllab::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

// Two shifted blobs; the first half is class 0.
struct Blobs {
    ssllab::Matrix X;
    std::vector<int> y;
};

inline Blobs blobs(Eigen::Index n, Eigen::Index d, double shift, std::uint64_t seed) {
    Blobs b{random_matrix(n, d, seed), {}};
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = i < n / 2 ? 0 : 1;
        b.y.push_back(c);
        b.X.row(i).array() += c == 1 ? shift : -shift;
    }
    return b;
}

inline double max_abs_diff(const ssllab::Vector& a, const ssllab::Vector& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
