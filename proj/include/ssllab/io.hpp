#pragma once

#include "ssllab/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ssllab {

// Shortest text that round-trips, at most 17 significant digits.
std::string format_number(double v);
std::string csv_field(const std::string& s);

struct DataTable {
    Dataset data;
    std::vector<std::string> feature_names;
    bool has_label_column = false;
};

// Label column may be absent only when require_label is false. Class order is first-seen
// unless given.
DataTable parse_data_csv(const std::string& text, const std::string& label_col, bool require_label = true,
                         const std::optional<ClassOrder>& order = std::nullopt);
DataTable read_data_file(const std::filesystem::path& path, const std::string& label_col, bool require_label = true,
                         const std::optional<ClassOrder>& order = std::nullopt);
std::string data_to_csv(const Dataset& d, const std::vector<std::string>& feature_names = {},
                        const std::string& label_col = "Class");

// Writes to a temporary sibling and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

nlohmann::json model_to_json(const TrainedModel& m);
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const TrainedModel& m);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace ssllab
