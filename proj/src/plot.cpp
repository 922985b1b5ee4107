#include "ssllab/plot.hpp"

#include "ssllab/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace ssllab {

namespace {

constexpr double width = 480.0;
constexpr double height = 480.0;
constexpr double margin = 40.0;

const std::array<const char*, 6> palette{"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

struct Frame {
    Box box;
    double px(double x) const { return margin + (x - box.x_min) / (box.x_max - box.x_min) * (width - 2 * margin); }
    double py(double y) const {
        return height - margin - (y - box.y_min) / (box.y_max - box.y_min) * (height - 2 * margin);
    }
};

std::string num(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void header(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"14\">" << escape(title) << "</text>\n";
    }
}

void axes(std::ostringstream& out) {
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin << "\" height=\""
        << height - 2 * margin << "\" fill=\"none\" stroke=\"#444\"/>\n";
}

void segments(std::ostringstream& out, const Frame& f, const std::vector<Segment>& segs, const char* style) {
    if (segs.empty()) return;
    out << "<path fill=\"none\" " << style << " d=\"";
    for (const auto& s : segs) {
        out << 'M' << num(f.px(s.x1)) << ' ' << num(f.py(s.y1)) << 'L' << num(f.px(s.x2)) << ' ' << num(f.py(s.y2));
    }
    out << "\"/>\n";
}

}  // namespace

Box padded_box(const Matrix& X, double pad) {
    if (X.cols() < 2) throw ShapeError("need two feature columns");
    Box b;
    if (X.rows() == 0) return b;
    b.x_min = X.col(0).minCoeff();
    b.x_max = X.col(0).maxCoeff();
    b.y_min = X.col(1).minCoeff();
    b.y_max = X.col(1).maxCoeff();
    auto widen = [pad](double& lo, double& hi) {
        const double r = hi - lo > 0.0 ? hi - lo : 1.0;
        lo -= pad * r;
        hi += pad * r;
    };
    widen(b.x_min, b.x_max);
    widen(b.y_min, b.y_max);
    return b;
}

Grid evaluate_grid(const Params& model, const Box& box, int g) {
    if (g < 2) throw ArgumentError("grid must have at least 2 points per side");
    if (input_dim(model) != 2) throw ShapeError("boundary needs a model on 2 features");
    Grid grid;
    grid.xs = Vector::LinSpaced(g, box.x_min, box.x_max);
    grid.ys = Vector::LinSpaced(g, box.y_min, box.y_max);
    Matrix pts(static_cast<Eigen::Index>(g) * g, 2);
    for (int j = 0; j < g; ++j) {
        for (int i = 0; i < g; ++i) pts.row(j * g + i) << grid.xs[i], grid.ys[j];
    }
    const Vector dv = decision_values(model, pts);
    grid.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(dv.data(), g, g);
    return grid;
}

std::string grid_to_csv(const Grid& grid) {
    std::ostringstream out;
    out << "x1,x2,decision_value\n";
    for (Eigen::Index j = 0; j < grid.ys.size(); ++j) {
        for (Eigen::Index i = 0; i < grid.xs.size(); ++i) {
            out << format_number(grid.xs[i]) << ',' << format_number(grid.ys[j]) << ','
                << format_number(grid.values(j, i)) << '\n';
        }
    }
    return out.str();
}

std::vector<Segment> zero_contour(const Grid& grid) {
    std::vector<Segment> out;
    const auto nx = grid.xs.size();
    const auto ny = grid.ys.size();
    for (Eigen::Index j = 0; j + 1 < ny; ++j) {
        for (Eigen::Index i = 0; i + 1 < nx; ++i) {
            // corners counter-clockwise from bottom-left
            const std::array<double, 4> v{grid.values(j, i), grid.values(j, i + 1), grid.values(j + 1, i + 1),
                                          grid.values(j + 1, i)};
            const std::array<double, 4> cx{grid.xs[i], grid.xs[i + 1], grid.xs[i + 1], grid.xs[i]};
            const std::array<double, 4> cy{grid.ys[j], grid.ys[j], grid.ys[j + 1], grid.ys[j + 1]};
            int mask = 0;
            for (int c = 0; c < 4; ++c) mask |= (v[c] > 0.0 ? 1 : 0) << c;
            if (mask == 0 || mask == 15) continue;

            std::array<std::array<double, 2>, 4> cross{};
            std::array<bool, 4> has{};
            for (int e = 0; e < 4; ++e) {
                const int a = e, b = (e + 1) % 4;
                if ((v[a] > 0.0) == (v[b] > 0.0)) continue;
                double t = v[a] / (v[a] - v[b]);
                t = std::clamp(t, 0.0, 1.0);
                cross[e] = {cx[a] + t * (cx[b] - cx[a]), cy[a] + t * (cy[b] - cy[a])};
                has[e] = true;
            }
            auto seg = [&](int e1, int e2) {
                out.push_back({cross[e1][0], cross[e1][1], cross[e2][0], cross[e2][1]});
            };
            if (mask == 5 || mask == 10) {
                // saddle: the centre value decides which corners connect
                const double centre = (v[0] + v[1] + v[2] + v[3]) / 4.0;
                const bool centre_pos = centre > 0.0;
                const bool c0_pos = v[0] > 0.0;
                if (centre_pos == c0_pos) {
                    seg(0, 1);
                    seg(2, 3);
                } else {
                    seg(3, 0);
                    seg(1, 2);
                }
                continue;
            }
            std::array<int, 2> found{};
            int k = 0;
            for (int e = 0; e < 4; ++e) {
                if (has[e]) found[k++] = e;
            }
            seg(found[0], found[1]);
        }
    }
    return out;
}

std::string scatter_svg(const ScatterLayer& layer, const Box& box) {
    const Frame f{box};
    std::ostringstream out;
    header(out, layer.title);
    axes(out);
    if (layer.data) {
        const auto& d = *layer.data;
        if (d.X.cols() < 2) throw ShapeError("scatter plot needs two feature columns");
        // unlabeled points first so labeled ones stay visible
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t r = 0; r < d.rows(); ++r) {
                const auto& lab = d.y[r];
                if ((pass == 0) == lab.has_value()) continue;
                const auto i = static_cast<Eigen::Index>(r);
                const char* fill = lab ? palette[static_cast<std::size_t>(*lab)] : "#bbbbbb";
                const double rad = lab ? 4.0 : 2.0;
                out << "<circle cx=\"" << num(f.px(d.X(i, 0))) << "\" cy=\"" << num(f.py(d.X(i, 1))) << "\" r=\"" << rad
                    << "\" fill=\"" << fill << "\"";
                if (lab) out << " stroke=\"black\" stroke-width=\"0.8\"";
                out << "/>\n";
            }
        }
    }
    for (const auto& extra : layer.extra_contours) {
        segments(out, f, extra, "stroke=\"#777\" stroke-width=\"1.5\" stroke-dasharray=\"5,4\"");
    }
    segments(out, f, layer.contour, "stroke=\"black\" stroke-width=\"2\"");
    out << "</svg>\n";
    return out.str();
}

std::string learning_curve_svg(const ExperimentResult& r, const std::string& dataset, const std::string& measure,
                               const std::string& title) {
    std::vector<std::string> classifiers;
    std::set<std::size_t> size_set;
    std::map<std::pair<std::string, std::size_t>, std::pair<double, int>> sums;
    for (const auto& rec : r.records) {
        if (rec.dataset != dataset || rec.measure != measure || !rec.value) continue;
        if (std::find(classifiers.begin(), classifiers.end(), rec.classifier) == classifiers.end()) {
            classifiers.push_back(rec.classifier);
        }
        size_set.insert(rec.size);
        auto& s = sums[{rec.classifier, rec.size}];
        s.first += *rec.value;
        s.second += 1;
    }
    Box box{0.0, 1.0, 0.0, 1.0};
    bool first = true;
    for (const auto& [key, s] : sums) {
        const double x = std::log2(static_cast<double>(std::max<std::size_t>(key.second, 1)));
        const double y = s.first / s.second;
        if (first) {
            box = {x, x, y, y};
            first = false;
        }
        box.x_min = std::min(box.x_min, x);
        box.x_max = std::max(box.x_max, x);
        box.y_min = std::min(box.y_min, y);
        box.y_max = std::max(box.y_max, y);
    }
    if (box.x_max - box.x_min <= 0.0) box.x_max = box.x_min + 1.0;
    if (box.y_max - box.y_min <= 0.0) box.y_max = box.y_min + 1.0;
    const double pad = 0.05 * (box.y_max - box.y_min);
    box.y_min -= pad;
    box.y_max += pad;
    const Frame f{box};

    std::ostringstream out;
    header(out, title);
    axes(out);
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">log2(unlabeled)</text>\n";
    out << "<text x=\"" << margin << "\" y=\"" << margin - 6 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(measure) << " [" << num(box.y_min) << ", " << num(box.y_max) << "]</text>\n";
    for (std::size_t c = 0; c < classifiers.size(); ++c) {
        const char* colour = palette[c % palette.size()];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        bool sep = false;
        for (auto s : size_set) {
            const auto it = sums.find({classifiers[c], s});
            if (it == sums.end()) continue;
            const double x = std::log2(static_cast<double>(std::max<std::size_t>(s, 1)));
            if (sep) out << ' ';
            out << num(f.px(x)) << ',' << num(f.py(it->second.first / it->second.second));
            sep = true;
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - margin - 4 << "\" y=\"" << margin + 16 + 14 * static_cast<double>(c)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << colour << "\">"
            << escape(classifiers[c]) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace ssllab
