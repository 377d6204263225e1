#pragma once

#include <string>
#include <vector>

namespace delaycomp {

struct Series {
    std::string label;
    std::vector<double> x, y;
};

struct LineChart {
    std::string title, xlabel, ylabel;
    bool log_y = false;
    std::vector<Series> series;
};

/// Values on a rectilinear grid, index iy * x.size() + ix.
struct Heatmap {
    std::string title, xlabel, ylabel;
    std::vector<double> x, y, values;
    bool log_scale = false;
};

std::string render_line_chart(const LineChart& chart, int width = 720, int height = 420);
/// Cells beyond `max_cells` per axis are decimated by nearest sampling.
std::string render_heatmap(const Heatmap& map, int width = 720, int height = 480, std::size_t max_cells = 160);

} // namespace delaycomp
