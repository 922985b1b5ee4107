#pragma once

#include "ssllab/core.hpp"
#include "ssllab/supervised.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ssllab {

Dataset add_missing_labels_mar(const Dataset& d, double prob, std::uint64_t seed);
// Original labels of the rows that are unlabeled in d_missing, in row order.
std::vector<int> true_labels(const Dataset& d_missing, const Dataset& d_original);

struct SslSplit {
    Dataset labeled;
    Dataset unlabeled;  // labels hidden; recover with unlabeled_truth
    Dataset test;
    std::vector<int> unlabeled_truth;
    std::vector<std::size_t> labeled_rows;
    std::vector<std::size_t> unlabeled_rows;
    std::vector<std::size_t> test_rows;
};

SslSplit split_dataset_ssl(const Dataset& d, std::size_t n_l, std::size_t n_u, std::size_t n_test,
                           std::size_t min_per_class, std::uint64_t seed);

using Trainer = std::function<Fit(const Matrix& Xl, Labels yl, const Matrix& Xu)>;

struct ClassifierEntry {
    std::string name;
    Trainer train;
    bool uses_unlabeled = true;
};

// What a measure sees: the fitted model, the evaluation set and the training set with true labels.
struct EvalContext {
    const Params& model;
    const Matrix& X_test;
    Labels y_test;
    const Matrix& X_train;
    Labels y_train;
};

using Measure = std::function<double(const EvalContext&)>;

struct MeasureEntry {
    std::string name;
    Measure fn;
};

double measure_error(const Params& m, const Matrix& X_test, Labels y_test);
double measure_loss_test(const Params& m, const Matrix& X_test, Labels y_test);
double measure_loss_all(const Params& m, const Dataset& d_missing, const Dataset& d_original);

// "error", "loss_test", "loss_train" (mean loss over labeled + unlabeled training rows with true labels).
MeasureEntry named_measure(const std::string& name);
std::vector<std::string> measure_names();

struct TrialPlan {
    std::uint64_t base_seed = 1;
    int repeats = 1;
    std::size_t n_l = 10;
    std::vector<std::size_t> sizes;
    std::vector<MeasureEntry> measures;
    std::vector<ClassifierEntry> classifiers;
    int jobs = 1;
};

struct ResultRecord {
    std::string dataset;
    std::string classifier;
    int repeat = 0;
    std::size_t size = 0;  // unlabeled count, or fold index in cross-validation
    std::string measure;
    std::optional<double> value;
};

struct ExperimentResult {
    std::vector<ResultRecord> records;
    std::size_t error_count = 0;
    std::vector<std::string> errors;

    void append(const ExperimentResult& other);
};

ExperimentResult learning_curve_ssl(const Dataset& d, const TrialPlan& plan, const std::string& dataset_name = "data",
                                    std::size_t dataset_index = 0);

struct CrossValidationPlan {
    int k_folds = 10;
    std::size_t n_labeled = 10;
    int repeats = 1;
    std::uint64_t seed = 1;
    std::vector<MeasureEntry> measures;
    std::vector<ClassifierEntry> classifiers;
    int jobs = 1;
};

ExperimentResult cross_validation_ssl(const Dataset& d, const CrossValidationPlan& plan,
                                      const std::string& dataset_name = "data", std::size_t dataset_index = 0);

// Mean over repeats of the present values for one cell; nullopt when none are present.
std::optional<double> mean_value(const ExperimentResult& r, const std::string& classifier, std::size_t size,
                                 const std::string& measure);

std::string to_csv(const ExperimentResult& r);

// Runs body(i) for i in [0, count) on up to jobs threads. The first exception is rethrown.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace ssllab
