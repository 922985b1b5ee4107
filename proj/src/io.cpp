#include "ssllab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ssllab {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
    const std::string t = trim(field);
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw EncodingError("row " + std::to_string(row) + ", column " + column + ": '" + field +
                            "' is not a finite number");
    }
    return v;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
    return rows;
}

Vector vector_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_from(const json& j, Eigen::Index cols) {
    Matrix m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Vector r = vector_from(j[i]);
        if (r.size() != cols) throw ConfigError("model file: ragged matrix");
        m.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    return m;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw NumericalError("cannot format number");
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

DataTable parse_data_csv(const std::string& text, const std::string& label_col, bool require_label,
                         const std::optional<ClassOrder>& order) {
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
        while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    }
    if (lines.empty()) throw ConfigError("data file has no header");
    const auto header = split_csv_line(lines[0]);
    DataTable t;
    std::ptrdiff_t label_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (trim(header[j]) == label_col) {
            label_idx = static_cast<std::ptrdiff_t>(j);
        } else {
            t.feature_names.push_back(trim(header[j]));
        }
    }
    t.has_label_column = label_idx >= 0;
    if (!t.has_label_column && require_label) throw ConfigError("label column '" + label_col + "' not found in header");

    const std::size_t n = lines.size() - 1;
    const auto d = static_cast<Eigen::Index>(t.feature_names.size());
    t.data.X.resize(static_cast<Eigen::Index>(n), d);
    t.data.y.assign(n, std::nullopt);
    std::vector<std::string> seen;
    if (order) seen.assign(order->begin(), order->end());
    std::vector<std::string> raw_labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto fields = split_csv_line(lines[i + 1]);
        if (fields.size() != header.size()) {
            throw ShapeError("row " + std::to_string(i + 1) + " has " + std::to_string(fields.size()) +
                             " fields, header has " + std::to_string(header.size()));
        }
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (static_cast<std::ptrdiff_t>(j) == label_idx) {
                raw_labels[i] = trim(fields[j]);
                continue;
            }
            t.data.X(static_cast<Eigen::Index>(i), col++) = parse_number(fields[j], i + 1, header[j]);
        }
        const auto& lab = raw_labels[i];
        if (!lab.empty() && std::find(seen.begin(), seen.end(), lab) == seen.end()) {
            if (order) throw EncodingError("unknown class " + lab);
            seen.push_back(lab);
        }
    }
    if (seen.size() > 2) throw EncodingError("more than two classes in label column (" + seen[2] + ")");
    for (int k = 0; seen.size() < 2; ++k) {
        const std::string placeholder = "class" + std::to_string(k);
        if (std::find(seen.begin(), seen.end(), placeholder) == seen.end()) seen.push_back(placeholder);
    }
    t.data.class_order = {seen[0], seen[1]};
    for (std::size_t i = 0; i < n; ++i) {
        if (!raw_labels[i].empty()) t.data.y[i] = class_index(raw_labels[i], t.data.class_order);
    }
    return t;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DataTable read_data_file(const std::filesystem::path& path, const std::string& label_col, bool require_label,
                         const std::optional<ClassOrder>& order) {
    return parse_data_csv(read_file(path), label_col, require_label, order);
}

std::string data_to_csv(const Dataset& d, const std::vector<std::string>& feature_names, const std::string& label_col) {
    d.validate();
    std::ostringstream out;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        out << csv_field(idx < feature_names.size() ? feature_names[idx] : "x" + std::to_string(j + 1)) << ',';
    }
    out << csv_field(label_col) << '\n';
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.X.cols(); ++j) out << format_number(d.X(i, j)) << ',';
        const auto& l = d.y[static_cast<std::size_t>(i)];
        if (l) out << csv_field(d.class_order[static_cast<std::size_t>(*l)]);
        out << '\n';
    }
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot rename into " + path.string());
    }
}

nlohmann::json model_to_json(const TrainedModel& m) {
    json j;
    j["schema"] = 1;
    j["tag"] = m.tag;
    j["class_order"] = {m.class_order[0], m.class_order[1]};
    std::visit(overloaded{
                   [&](const LinearModel& p) {
                       j["params"] = {{"kind", "linear"},
                                      {"weights", vector_json(p.w)},
                                      {"intercept", p.b},
                                      {"link", p.link == LinearModel::Link::logistic ? "logistic" : "identity"}};
                   },
                   [&](const KernelModel& p) {
                       j["params"] = {{"kind", "kernel"},
                                      {"alpha", vector_json(p.alpha)},
                                      {"bias", p.bias},
                                      {"support", matrix_json(p.support)},
                                      {"dim", p.support.cols()},
                                      {"scale", p.scale == Target::pm_one ? "pm_one" : "zero_one"},
                                      {"loss", p.loss == KernelModel::Loss::squared_hinge ? "squared_hinge" : "squared"}};
                       j["kernel"] = {{"family", to_string(p.kernel.family)}, {"sigma", p.kernel.sigma}};
                   },
                   [&](const GaussianModel& p) {
                       j["params"] = {{"kind", "gaussian"},
                                      {"priors", {p.priors[0], p.priors[1]}},
                                      {"means", matrix_json(p.means)},
                                      {"covariance", matrix_json(p.covariance)},
                                      {"spherical", p.spherical},
                                      {"floored", p.floored}};
                   },
               },
               m.params);
    if (m.responsibilities) j["responsibilities"] = vector_json(*m.responsibilities);
    j["training_meta"] = {{"seed", m.meta.seed}, {"converged", m.meta.converged}, {"iterations", m.meta.iterations}};
    return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<int>() != 1) throw ConfigError("unsupported model schema");
        TrainedModel m;
        m.tag = j.at("tag").get<std::string>();
        const auto co = j.at("class_order").get<std::vector<std::string>>();
        if (co.size() != 2) throw ConfigError("model file: class_order needs two entries");
        m.class_order = {co[0], co[1]};
        const auto& p = j.at("params");
        const auto kind = p.at("kind").get<std::string>();
        if (kind == "linear") {
            LinearModel lm;
            lm.w = vector_from(p.at("weights"));
            lm.b = p.at("intercept").get<double>();
            lm.link = p.at("link").get<std::string>() == "logistic" ? LinearModel::Link::logistic
                                                                     : LinearModel::Link::identity;
            m.params = lm;
        } else if (kind == "kernel") {
            KernelModel km;
            km.alpha = vector_from(p.at("alpha"));
            km.bias = p.at("bias").get<double>();
            km.support = matrix_from(p.at("support"), p.at("dim").get<Eigen::Index>());
            km.scale = p.at("scale").get<std::string>() == "pm_one" ? Target::pm_one : Target::zero_one;
            km.loss = p.at("loss").get<std::string>() == "squared_hinge" ? KernelModel::Loss::squared_hinge
                                                                         : KernelModel::Loss::squared;
            const auto& k = j.at("kernel");
            km.kernel.family = k.at("family").get<std::string>() == "rbf" ? KernelSpec::Family::rbf
                                                                          : KernelSpec::Family::linear;
            km.kernel.sigma = k.at("sigma").get<double>();
            if (km.alpha.size() != km.support.rows()) throw ConfigError("model file: alpha and support sizes differ");
            m.params = km;
        } else if (kind == "gaussian") {
            GaussianModel gm;
            const auto pr = p.at("priors").get<std::vector<double>>();
            if (pr.size() != 2) throw ConfigError("model file: priors need two entries");
            gm.priors = {pr[0], pr[1]};
            const auto d = static_cast<Eigen::Index>(p.at("means").at(0).size());
            gm.means = matrix_from(p.at("means"), d);
            gm.covariance = matrix_from(p.at("covariance"), d);
            gm.spherical = p.at("spherical").get<bool>();
            gm.floored = p.value("floored", false);
            m.params = gm;
        } else {
            throw ConfigError("model file: unknown params kind " + kind);
        }
        if (j.contains("responsibilities")) m.responsibilities = vector_from(j.at("responsibilities"));
        const auto& meta = j.at("training_meta");
        m.meta.seed = meta.at("seed").get<std::uint64_t>();
        m.meta.converged = meta.at("converged").get<bool>();
        m.meta.iterations = meta.at("iterations").get<int>();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& m) {
    write_file_atomic(path, model_to_json(m).dump(2) + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) {
    try {
        return model_from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace ssllab
