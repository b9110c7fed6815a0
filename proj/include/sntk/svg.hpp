#pragma once

#include <string>
#include <vector>

namespace sntk {

/// Minimal line-chart emitter: one polyline per series over a shared
/// 0..n-1 x axis, linear or log-10 y scale, fixed 640x400 canvas.
struct SvgSeries {
    std::string label;
    std::string color;  // e.g. "#1f77b4"
    std::vector<double> values;
};

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series, bool log_y);

}  // namespace sntk
