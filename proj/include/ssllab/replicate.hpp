#pragma once

#include "ssllab/core.hpp"
#include "ssllab/eval.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ssllab {

struct ReplicateOptions {
    std::filesystem::path out_dir = ".";
    std::optional<int> repeats;
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct ReplicateSummary {
    std::vector<std::string> lines;
    std::vector<std::filesystem::path> files;
    bool pass = false;
};

std::vector<std::string> replicate_targets();
ReplicateSummary replicate(const std::string& target, const ReplicateOptions& opt);

// Learning curves on the two Gaussian problems: n=2000, d=2, n_l=10, sizes 2..1024,
// supervised vs self-learning least squares, measures error and loss_test.
TrialPlan gaussian_curve_plan(int repeats, std::uint64_t seed, int jobs);
Dataset gaussian_curve_data(bool expected, std::uint64_t seed);

// All-data squared loss after removing labels at random (p = 0.995, n = 1000, resampled
// until both classes keep a label).
struct LossTrial {
    double supervised = 0.0;
    double self_learning = 0.0;
    double icls = 0.0;
    double icls_projection = 0.0;
    std::size_t labeled = 0;
};
LossTrial loss_trial(std::uint64_t seed);

// Harmonic solution with one label per class; accuracy on the unlabeled points.
struct HarmonicTrial {
    Dataset data;                       // labels hidden except the two seeds
    std::vector<int> truth;             // all rows
    std::vector<int> predicted;         // all rows
    double accuracy = 0.0;
};
HarmonicTrial harmonic_planes_trial(std::uint64_t seed);
HarmonicTrial harmonic_spirals_trial(std::uint64_t seed);

// Crescent moons with one label per class; rbf sigma 0.05.
struct MoonTrial {
    Dataset data;
    std::vector<int> unlabeled_truth;
    double svm_accuracy = 0.0;         // C = 2500
    double lapsvm_low_accuracy = 0.0;  // gamma = 10
    double lapsvm_accuracy = 0.0;      // gamma = 10000
    Params svm, lapsvm_low, lapsvm;
};
MoonTrial moon_trial(std::uint64_t seed);

}  // namespace ssllab
