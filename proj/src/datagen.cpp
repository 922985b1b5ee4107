#include "ssllab/datagen.hpp"

#include "ssllab/rng.hpp"

#include <cmath>
#include <numbers>

namespace ssllab {

namespace {

void require_sigma(double s, const char* name) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError(std::string(name) + " must be nonnegative");
}

void require_count(std::size_t n) {
    if (n < 1) throw ArgumentError("n_per_class must be at least 1");
}

Dataset empty_dataset(std::size_t n, int d) {
    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(n), d);
    ds.y.resize(n);
    ds.class_order = {"A", "B"};
    return ds;
}

Vector split_direction(int d) {
    Vector v = Vector::Zero(d);
    for (int j = 0; j < d; ++j) v[j] = (j % 2 == 0) ? 1.0 : -1.0;
    if (d % 2 == 1) v[d - 1] = 0.0;
    return v;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Dataset generate_two_class_gaussian(std::size_t n, int d, double variance, bool expected, std::uint64_t seed) {
    if (d < 1) throw ArgumentError("d must be at least 1");
    if (!expected && d < 2) throw ArgumentError("expected=false needs d >= 2");
    if (!(variance > 0.0) || !std::isfinite(variance)) throw ArgumentError("variance must be positive");
    if (n < 2) throw ArgumentError("n must be at least 2");
    Rng rng(seed);
    Dataset ds = empty_dataset(n, d);
    const std::size_t n0 = (n + 1) / 2;
    const double sd = std::sqrt(variance);
    const Vector v = split_direction(d);
    const double vv = v.squaredNorm();
    for (std::size_t i = 0; i < n; ++i) {
        const int c = i < n0 ? 0 : 1;
        Vector x(d);
        if (expected) {
            for (int j = 0; j < d; ++j) x[j] = (c == 1 ? 1.0 : -1.0) + sd * rng.normal();
        } else {
            double s = 0.0;
            do {
                const double mu = rng.uniform() < 0.5 ? -1.0 : 1.0;
                for (int j = 0; j < d; ++j) x[j] = mu + sd * rng.normal();
                s = v.dot(x);
            } while (s == 0.0);
            if ((s > 0.0) != (c == 1)) x -= (2.0 * s / vv) * v;
        }
        ds.X.row(static_cast<Eigen::Index>(i)) = x.transpose();
        ds.y[i] = c;
    }
    return ds;
}

double two_class_gaussian_bayes_error(int d, double variance, bool expected) {
    if (!expected) return 0.0;
    return normal_cdf(-std::sqrt(static_cast<double>(d) / variance));
}

int two_class_gaussian_bayes_class(const Eigen::Ref<const Eigen::RowVectorXd>& x, bool expected) {
    if (expected) return x.sum() > 0.0 ? 1 : 0;
    const Vector v = split_direction(static_cast<int>(x.size()));
    return x.dot(v.transpose()) > 0.0 ? 1 : 0;
}

Dataset generate_crescent_moon(std::size_t n_per_class, double noise_sigma, std::uint64_t seed) {
    require_count(n_per_class);
    require_sigma(noise_sigma, "noise_sigma");
    Rng rng(seed);
    Dataset ds = empty_dataset(2 * n_per_class, 2);
    const double R = crescent_radius;
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const int c = i < n_per_class ? 0 : 1;
        const double t = rng.uniform(0.0, std::numbers::pi);
        double x1 = R * std::cos(t);
        double x2 = R * std::sin(t);
        if (c == 1) {
            x1 = R - x1;
            x2 = 0.4 * R - x2;
        }
        ds.X(static_cast<Eigen::Index>(i), 0) = x1 + noise_sigma * rng.normal();
        ds.X(static_cast<Eigen::Index>(i), 1) = x2 + noise_sigma * rng.normal();
        ds.y[i] = c;
    }
    return ds;
}

Dataset generate_spirals(std::size_t n_per_class, double noise_sigma, double turns, std::uint64_t seed) {
    require_count(n_per_class);
    require_sigma(noise_sigma, "noise_sigma");
    if (!(turns > 0.0)) throw ArgumentError("turns must be positive");
    Rng rng(seed);
    Dataset ds = empty_dataset(2 * n_per_class, 2);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const int c = i < n_per_class ? 0 : 1;
        const double t = rng.uniform();
        const double r = 0.5 + 2.0 * t;
        const double theta = 2.0 * std::numbers::pi * turns * t + (c == 1 ? std::numbers::pi : 0.0);
        ds.X(static_cast<Eigen::Index>(i), 0) = r * std::cos(theta) + noise_sigma * rng.normal();
        ds.X(static_cast<Eigen::Index>(i), 1) = r * std::sin(theta) + noise_sigma * rng.normal();
        ds.y[i] = c;
    }
    return ds;
}

Dataset generate_parallel_planes(std::size_t n_per_class, double noise_sigma, std::uint64_t seed) {
    require_count(n_per_class);
    require_sigma(noise_sigma, "noise_sigma");
    Rng rng(seed);
    Dataset ds = empty_dataset(2 * n_per_class, 2);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const int c = i < n_per_class ? 0 : 1;
        ds.X(static_cast<Eigen::Index>(i), 0) = rng.uniform(0.0, 2.0);
        ds.X(static_cast<Eigen::Index>(i), 1) = static_cast<double>(c) + noise_sigma * rng.normal();
        ds.y[i] = c;
    }
    return ds;
}

Dataset generate_two_circles(std::size_t n_per_class, double noise_sigma, std::uint64_t seed) {
    require_count(n_per_class);
    require_sigma(noise_sigma, "noise_sigma");
    Rng rng(seed);
    Dataset ds = empty_dataset(2 * n_per_class, 2);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const int c = i < n_per_class ? 0 : 1;
        const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double r = c == 0 ? 1.0 : 2.0;
        ds.X(static_cast<Eigen::Index>(i), 0) = r * std::cos(t) + noise_sigma * rng.normal();
        ds.X(static_cast<Eigen::Index>(i), 1) = r * std::sin(t) + noise_sigma * rng.normal();
        ds.y[i] = c;
    }
    return ds;
}

}  // namespace ssllab
