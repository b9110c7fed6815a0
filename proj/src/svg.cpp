#include "sntk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sntk/errors.hpp"

namespace sntk {

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series, bool log_y) {
    const double width = 640.0, height = 400.0;
    const double left = 50.0, right = 615.0, top = 40.0, bottom = 370.0;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::size_t max_len = 0;
    for (const auto& s : series) {
        max_len = std::max(max_len, s.values.size());
        for (double v : s.values) {
            const double y = log_y ? (v > 0.0 ? std::log10(v) : 0.0) : v;
            if (log_y && v <= 0.0) continue;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }

    std::ofstream out(path);
    if (!out) throw io_error("svg: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title
        << (log_y ? " (log scale)" : "") << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";

    char buf[64];
    double legend_y = top + 6.0;
    for (const auto& s : series) {
        if (s.values.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\" points=\"";
        const double denom = s.values.size() > 1 ? double(s.values.size() - 1) : 1.0;
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            double v = s.values[i];
            double yv = log_y ? (v > 0.0 ? std::log10(v) : lo) : v;
            yv = std::clamp(yv, lo, hi);
            const double px = left + (right - left) * double(i) / denom;
            const double py = bottom - (bottom - top) * (yv - lo) / (hi - lo);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << right - 120.0 << "\" y=\"" << legend_y
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
            << s.color << "\">" << s.label << "</text>\n";
        legend_y += 14.0;
    }
    out << "</svg>\n";
    if (!out) throw io_error("svg: write failed for " + path);
}

}  // namespace sntk
