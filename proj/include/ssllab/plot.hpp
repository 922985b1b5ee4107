#pragma once

#include "ssllab/core.hpp"
#include "ssllab/eval.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssllab {

struct Box {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

// Bounding box of the first two columns, each side padded by pad times the range.
Box padded_box(const Matrix& X, double pad = 0.1);

// values(j, i) is the decision value at (xs[i], ys[j]).
struct Grid {
    Vector xs;
    Vector ys;
    Matrix values;
};

Grid evaluate_grid(const Params& model, const Box& box, int g);
std::string grid_to_csv(const Grid& grid);

struct Segment {
    double x1, y1, x2, y2;
};

// Zero level set by marching squares, with linear interpolation along cell edges.
// A value counts as positive when > 0, matching the prediction tie rule.
std::vector<Segment> zero_contour(const Grid& grid);

struct ScatterLayer {
    const Dataset* data = nullptr;
    std::vector<Segment> contour;
    std::vector<std::vector<Segment>> extra_contours;  // drawn dashed
    std::string title;
};

std::string scatter_svg(const ScatterLayer& layer, const Box& box);

// Mean of a measure across repeats against size (log2 axis), one polyline per classifier.
std::string learning_curve_svg(const ExperimentResult& r, const std::string& dataset, const std::string& measure,
                               const std::string& title);

}  // namespace ssllab
