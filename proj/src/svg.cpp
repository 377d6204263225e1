#include "delaycomp/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "delaycomp/csv.hpp"

namespace delaycomp {
namespace {

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

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

// Viridis-like ramp through five stops.
std::string ramp(double t) {
    static constexpr double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    if (!std::isfinite(t)) return "#ffffff";
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int k = std::min(3, static_cast<int>(t));
    const double f = t - k;
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

struct Frame {
    double left = 70, right = 20, top = 40, bottom = 50;
    int width, height;
    double x0, x1, y0, y1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl, bool log_y) {
    os << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width - f.left - f.right
       << "\" height=\"" << f.height - f.top - f.bottom << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        os << "<text x=\"" << f.px(xv) << "\" y=\"" << f.height - f.bottom + 18
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
        os << "<text x=\"" << f.left - 6 << "\" y=\"" << f.py(yv) + 4
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    }
    os << "<text x=\"" << f.width / 2.0 << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" << escape(title)
       << "</text>\n";
    os << "<text x=\"" << f.width / 2.0 << "\" y=\"" << f.height - 10
       << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
    os << "<text x=\"14\" y=\"" << f.height / 2.0 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << f.height / 2.0 << ")\">" << escape(yl) << "</text>\n";
}

void pad(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double d = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
        lo -= d;
        hi += d;
    }
}

} // namespace

std::string render_line_chart(const LineChart& chart, int width, int height) {
    auto ty = [&](double y) { return chart.log_y ? std::log10(std::max(y, 1e-300)) : y; };
    Frame f{};
    f.width = width;
    f.height = height;
    f.x0 = f.y0 = std::numeric_limits<double>::infinity();
    f.x1 = f.y1 = -std::numeric_limits<double>::infinity();
    for (const auto& s : chart.series)
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (chart.log_y && s.y[k] <= 0)) continue;
            f.x0 = std::min(f.x0, s.x[k]);
            f.x1 = std::max(f.x1, s.x[k]);
            f.y0 = std::min(f.y0, ty(s.y[k]));
            f.y1 = std::max(f.y1, ty(s.y[k]));
        }
    if (!std::isfinite(f.x0)) f.x0 = 0, f.x1 = 1, f.y0 = 0, f.y1 = 1;
    pad(f.x0, f.x1);
    pad(f.y0, f.y1);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    axes(os, f, chart.title, chart.xlabel, chart.ylabel, chart.log_y);
    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const auto& s = chart.series[si];
        const char* color = palette[si % palette.size()];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!std::isfinite(s.y[k]) || (chart.log_y && s.y[k] <= 0)) continue;
            os << fmt(f.px(s.x[k])) << ',' << fmt(f.py(ty(s.y[k]))) << ' ';
        }
        os << "\"/>\n";
        const double ly = f.top + 14 + 16.0 * si;
        os << "<line x1=\"" << width - f.right - 120 << "\" y1=\"" << ly - 4 << "\" x2=\"" << width - f.right - 100
           << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << width - f.right - 95 << "\" y=\"" << ly << "\" font-size=\"11\">" << escape(s.label)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_heatmap(const Heatmap& map, int width, int height, std::size_t max_cells) {
    const std::size_t nx = map.x.size(), ny = map.y.size();
    Frame f{};
    f.width = width;
    f.height = height;
    f.right = 90;
    f.x0 = nx ? map.x.front() : 0.0;
    f.x1 = nx ? map.x.back() : 1.0;
    f.y0 = ny ? map.y.front() : 0.0;
    f.y1 = ny ? map.y.back() : 1.0;
    pad(f.x0, f.x1);
    pad(f.y0, f.y1);

    auto tv = [&](double v) { return map.log_scale ? std::log10(std::max(std::abs(v), 1e-300)) : v; };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : map.values)
        if (std::isfinite(v)) {
            lo = std::min(lo, tv(v));
            hi = std::max(hi, tv(v));
        }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    pad(lo, hi);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const std::size_t cx = std::min(nx, max_cells), cy = std::min(ny, max_cells);
    if (cx > 0 && cy > 0 && map.values.size() == nx * ny) {
        const double cw = (width - f.left - f.right) / static_cast<double>(cx);
        const double ch = (height - f.top - f.bottom) / static_cast<double>(cy);
        for (std::size_t a = 0; a < cy; ++a) {
            const std::size_t iy = cy > 1 ? a * (ny - 1) / (cy - 1) : 0;
            for (std::size_t b = 0; b < cx; ++b) {
                const std::size_t ix = cx > 1 ? b * (nx - 1) / (cx - 1) : 0;
                const double v = map.values[iy * nx + ix];
                os << "<rect x=\"" << fmt(f.left + b * cw) << "\" y=\"" << fmt(height - f.bottom - (a + 1) * ch)
                   << "\" width=\"" << fmt(cw + 0.5) << "\" height=\"" << fmt(ch + 0.5) << "\" fill=\""
                   << ramp((tv(v) - lo) / (hi - lo)) << "\"/>\n";
            }
        }
    }
    axes(os, f, map.title, map.xlabel, map.ylabel, false);
    // colour bar
    const double bx = width - f.right + 20, bh = height - f.top - f.bottom;
    for (int k = 0; k < 50; ++k)
        os << "<rect x=\"" << bx << "\" y=\"" << fmt(f.top + bh * (49 - k) / 50.0) << "\" width=\"14\" height=\""
           << fmt(bh / 50.0 + 0.5) << "\" fill=\"" << ramp(k / 49.0) << "\"/>\n";
    auto label = [&](double v) { return fmt(map.log_scale ? std::pow(10.0, v) : v); };
    os << "<text x=\"" << bx + 18 << "\" y=\"" << f.top + 8 << "\" font-size=\"10\">" << label(hi) << "</text>\n";
    os << "<text x=\"" << bx + 18 << "\" y=\"" << f.top + bh << "\" font-size=\"10\">" << label(lo) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace delaycomp
