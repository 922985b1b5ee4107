#pragma once

#include "ssllab/core.hpp"
#include "ssllab/eval.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ssllab {

// Errors carry the JSON pointer of the offending field, relative to the object passed in
// and prefixed with the caller's base pointer.
struct FieldError : ConfigError {
    std::string pointer;
    FieldError(std::string ptr, const std::string& msg) : ConfigError(ptr + ": " + msg), pointer(std::move(ptr)) {}
};

std::vector<std::string> model_names();
bool is_semi_supervised(const std::string& model);

// Builds a trainer from a model name and a JSON object of hyperparameters. Unknown keys are
// rejected. Self-learning takes its base learner from "base" (default "ls") and passes its
// remaining keys to it.
ClassifierEntry make_classifier(const std::string& model, const nlohmann::json& params, const std::string& pointer = "");

std::vector<std::string> dataset_names();
Dataset make_dataset(const std::string& generator, const nlohmann::json& params, std::uint64_t seed,
                     const std::string& pointer = "");

}  // namespace ssllab
