#pragma once

#include "ssllab/core.hpp"

#include <cstdint>

namespace ssllab {

// Two isotropic clusters N(-1_d, var I) and N(+1_d, var I). With expected = true the
// clusters are the classes (class_order[1] is the +1_d cluster). With expected = false the
// points come from the same two-cluster mixture but the class is the side of the hyperplane
// v'x = 0, v = (1,-1,1,-1,...) (last entry 0 for odd d), which cuts through both clusters.
Dataset generate_two_class_gaussian(std::size_t n, int d, double variance, bool expected, std::uint64_t seed);

// Bayes error of the generator: Phi(-sqrt(d / var)) when expected, 0 otherwise.
double two_class_gaussian_bayes_error(int d, double variance, bool expected);
// Bayes-optimal class for a point of the generator.
int two_class_gaussian_bayes_class(const Eigen::Ref<const Eigen::RowVectorXd>& x, bool expected);

// Half moons of radius 5: class A at (R cos t, R sin t), class B at (R - R cos t, 0.4 R - R sin t).
Dataset generate_crescent_moon(std::size_t n_per_class, double noise_sigma, std::uint64_t seed);
inline constexpr double crescent_radius = 5.0;

Dataset generate_spirals(std::size_t n_per_class, double noise_sigma, double turns, std::uint64_t seed);
Dataset generate_parallel_planes(std::size_t n_per_class, double noise_sigma, std::uint64_t seed);
Dataset generate_two_circles(std::size_t n_per_class, double noise_sigma, std::uint64_t seed);

double normal_cdf(double x);

}  // namespace ssllab
