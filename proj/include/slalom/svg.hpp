#pragma once

#include "slalom/expert.hpp"
#include "slalom/sim.hpp"

#include <string>
#include <vector>

namespace slalom {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;      // empty: palette by index
    double width = 1.5;
    bool dashed = false;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;     // positive data only
    int width = 880;
    int height = 460;
};

/// Plain line chart with auto-scaled axes, 1-2-5 ticks and a legend.
void write_line_plot(const std::string& path,
                     const std::vector<PlotSeries>& series,
                     const PlotOptions& options);

/// Top-down course view: road edges, lane markings, cones, optional C2
/// reference, and one polyline per listed trace. The y axis is stretched
/// relative to x so lane changes are visible.
struct TrajectoryPlot {
    std::string title;
    const Course* course = nullptr;
    const ReferencePath* reference = nullptr;
    std::vector<PlotSeries> paths; // x/y in metres
    int width = 1000;
    int height = 360;
};

void write_trajectory_plot(const std::string& path, const TrajectoryPlot& plot);

} // namespace slalom
