#include "slalom/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace slalom {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string series_color(const PlotSeries& s, std::size_t index) {
    if (!s.color.empty()) return s.color;
    return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string fmt(double v) {
    // Compact tick/coordinate formatting; plots do not need round-tripping.
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    bool ok() const { return lo <= hi; }
    void pad() {
        if (!ok()) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        } else {
            const double m = 0.05 * (hi - lo);
            lo -= m;
            hi += m;
        }
    }
};

/// Tick positions on the 1-2-5 ladder covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw) {
            step = mag * mult;
            break;
        }
    }
    std::vector<double> ticks;
    double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + 1e-9 * span; v += step)
        ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
    std::vector<double> ticks;
    for (int e = static_cast<int>(std::floor(lo)); e <= std::ceil(hi); ++e)
        if (e >= lo - 1e-9 && e <= hi + 1e-9)
            ticks.push_back(static_cast<double>(e));
    if (ticks.empty()) ticks.push_back(lo);
    return ticks;
}

std::string log_tick_label(double exponent) {
    std::ostringstream os;
    os << "1e" << static_cast<int>(std::lround(exponent));
    return os.str();
}

class SvgFile {
public:
    SvgFile(const std::string& path, int w, int h) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write plot: " + path);
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
             << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
             << "\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }
    ~SvgFile() { out_ << "</svg>\n"; }

    void line(double x1, double y1, double x2, double y2,
              const std::string& stroke, double width = 1.0,
              const std::string& dash = "") {
        out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\""
             << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke
             << "\" stroke-width=\"" << fmt(width) << "\"";
        if (!dash.empty()) out_ << " stroke-dasharray=\"" << dash << "\"";
        out_ << "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& stroke, double width, bool dashed) {
        if (pts.size() < 2) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke
             << "\" stroke-width=\"" << fmt(width) << "\"";
        if (dashed) out_ << " stroke-dasharray=\"6 4\"";
        out_ << " points=\"";
        for (const auto& [x, y] : pts) out_ << fmt(x) << ',' << fmt(y) << ' ';
        out_ << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        out_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
             << "\" r=\"" << fmt(r) << "\" fill=\"" << fill << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12,
              const std::string& anchor = "start",
              const std::string& fill = "#333") {
        out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y)
             << "\" font-family=\"sans-serif\" font-size=\"" << size
             << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\">"
             << escape_text(s) << "</text>\n";
    }

private:
    std::ofstream out_;
};

struct Frame {
    // Margins around the data area.
    double left = 64, right = 16, top = 34, bottom = 44;
    int w = 0, h = 0;
    Range xr, yr;

    double sx(double x) const {
        return left + (x - xr.lo) / (xr.hi - xr.lo) * (w - left - right);
    }
    double sy(double y) const {
        return (h - bottom) - (y - yr.lo) / (yr.hi - yr.lo) * (h - top - bottom);
    }
};

} // namespace

void write_line_plot(const std::string& path,
                     const std::vector<PlotSeries>& series,
                     const PlotOptions& options) {
    Frame f;
    f.w = options.width;
    f.h = options.height;

    auto ty = [&](double y) { return options.log_y ? std::log10(y) : y; };

    for (const PlotSeries& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("plot series '" + s.label +
                                        "': x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (options.log_y && !(s.y[i] > 0.0)) continue;
            f.xr.include(s.x[i]);
            f.yr.include(ty(s.y[i]));
        }
    }
    f.xr.pad();
    f.yr.pad();

    SvgFile svg(path, f.w, f.h);

    // Grid and ticks.
    const std::vector<double> xt = nice_ticks(f.xr.lo, f.xr.hi);
    const std::vector<double> yt = options.log_y
                                       ? log_ticks(f.yr.lo, f.yr.hi)
                                       : nice_ticks(f.yr.lo, f.yr.hi);
    for (double v : xt) {
        svg.line(f.sx(v), f.sy(f.yr.lo), f.sx(v), f.sy(f.yr.hi), "#e5e5e5");
        svg.text(f.sx(v), f.h - f.bottom + 16, fmt(v), 11, "middle");
    }
    for (double v : yt) {
        svg.line(f.sx(f.xr.lo), f.sy(v), f.sx(f.xr.hi), f.sy(v), "#e5e5e5");
        svg.text(f.left - 6, f.sy(v) + 4,
                 options.log_y ? log_tick_label(v) : fmt(v), 11, "end");
    }

    // Axes box.
    svg.line(f.left, f.h - f.bottom, f.w - f.right, f.h - f.bottom, "#333");
    svg.line(f.left, f.top, f.left, f.h - f.bottom, "#333");

    // Data.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        std::vector<std::pair<double, double>> pts;
        pts.reserve(s.x.size());
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (options.log_y && !(s.y[i] > 0.0)) continue;
            pts.emplace_back(f.sx(s.x[i]), f.sy(ty(s.y[i])));
        }
        svg.polyline(pts, series_color(s, si), s.width, s.dashed);
    }

    // Labels, title, legend.
    svg.text(f.w / 2.0, f.h - 10, options.x_label, 12, "middle");
    svg.text(16, f.top - 14, options.y_label, 12);
    svg.text(f.w / 2.0, 18, options.title, 14, "middle", "#111");
    double ly = f.top + 8;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        if (s.label.empty()) continue;
        const double lx = f.w - f.right - 150;
        svg.line(lx, ly - 4, lx + 24, ly - 4, series_color(s, si), 2.5,
                 s.dashed ? "6 4" : "");
        svg.text(lx + 30, ly, s.label, 11);
        ly += 16;
    }
}

void write_trajectory_plot(const std::string& path,
                           const TrajectoryPlot& plot) {
    if (plot.course == nullptr)
        throw std::invalid_argument("trajectory plot needs a course");
    const Course& course = *plot.course;

    Frame f;
    f.w = plot.width;
    f.h = plot.height;
    f.xr.include(-5.0);
    f.xr.include(course.x_finish + 5.0);
    const double road = course.lane_width;
    f.yr.include(-road - 1.0);
    f.yr.include(road + 1.0);
    for (const PlotSeries& s : plot.paths)
        for (double y : s.y) f.yr.include(y);

    SvgFile svg(path, f.w, f.h);

    // Road surface and markings.
    svg.polyline({{f.sx(f.xr.lo), f.sy(road)}, {f.sx(f.xr.hi), f.sy(road)}},
                 "#444", 2.0, false);
    svg.polyline({{f.sx(f.xr.lo), f.sy(-road)}, {f.sx(f.xr.hi), f.sy(-road)}},
                 "#444", 2.0, false);
    svg.polyline({{f.sx(f.xr.lo), f.sy(0.0)}, {f.sx(f.xr.hi), f.sy(0.0)}},
                 "#bbb", 1.0, true);

    // Finish line.
    svg.line(f.sx(course.x_finish), f.sy(-road), f.sx(course.x_finish),
             f.sy(road), "#2ca02c", 2.0, "4 3");
    svg.text(f.sx(course.x_finish), f.sy(road) - 6, "finish", 11, "middle",
             "#2ca02c");

    // Cones.
    for (const Cone& cone : course.cones())
        svg.circle(f.sx(cone.x), f.sy(cone.y), 3.0, "#e07b00");

    if (plot.reference != nullptr) {
        std::vector<std::pair<double, double>> pts;
        for (double x = 0.0; x <= course.x_finish; x += 0.5)
            pts.emplace_back(f.sx(x), f.sy(plot.reference->y(x)));
        svg.polyline(pts, "#999", 1.2, true);
    }

    for (std::size_t si = 0; si < plot.paths.size(); ++si) {
        const PlotSeries& s = plot.paths[si];
        std::vector<std::pair<double, double>> pts;
        pts.reserve(s.x.size());
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts.emplace_back(f.sx(s.x[i]), f.sy(s.y[i]));
        svg.polyline(pts, series_color(s, si), s.width, s.dashed);
    }

    // Axes and legend.
    const std::vector<double> xt = nice_ticks(f.xr.lo, f.xr.hi, 8);
    for (double v : xt)
        svg.text(f.sx(v), f.h - f.bottom + 16, fmt(v), 11, "middle");
    svg.text(f.w / 2.0, f.h - 10, "x [m]", 12, "middle");
    svg.text(16, f.top - 14, "y [m]", 12);
    svg.text(f.w / 2.0, 18, plot.title, 14, "middle", "#111");
    double ly = f.top + 8;
    for (std::size_t si = 0; si < plot.paths.size(); ++si) {
        const PlotSeries& s = plot.paths[si];
        if (s.label.empty()) continue;
        const double lx = f.w - f.right - 170;
        svg.line(lx, ly - 4, lx + 24, ly - 4, series_color(s, si), 2.5,
                 s.dashed ? "6 4" : "");
        svg.text(lx + 30, ly, s.label, 11);
        ly += 16;
    }
    if (plot.reference != nullptr) {
        const double lx = f.w - f.right - 170;
        svg.line(lx, ly - 4, lx + 24, ly - 4, "#999", 1.5, "6 4");
        svg.text(lx + 30, ly, "reference", 11);
    }
}

} // namespace slalom
