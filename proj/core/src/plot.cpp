#include "semdrift/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "semdrift/common.hpp"

namespace semdrift {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 170.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape_xml(const std::string& s) {
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

}  // namespace

std::string render_line_chart(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series) {
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min, y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (double v : s.x) {
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }
        for (double v : s.y) {
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0;
        x_max = 1;
        y_min = 0;
        y_max = 1;
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;
    // Pad the y range slightly so lines do not sit on the frame.
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto sx = [&](double x) {
        return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w;
    };
    auto sy = [&](double y) {
        return kMarginTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           fmt_double(kWidth) + "\" height=\"" + fmt_double(kHeight) +
           "\" viewBox=\"0 0 " + fmt_double(kWidth) + " " +
           fmt_double(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt_double(kWidth / 2) +
           "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"18\">" + escape_xml(title) + "</text>\n";

    // Frame.
    svg += "<rect x=\"" + fmt_double(kMarginLeft) + "\" y=\"" +
           fmt_double(kMarginTop) + "\" width=\"" + fmt_double(plot_w) +
           "\" height=\"" + fmt_double(plot_h) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";

    // Ticks and grid.
    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        svg += "<line x1=\"" + fmt_double(sx(fx)) + "\" y1=\"" +
               fmt_double(kMarginTop) + "\" x2=\"" + fmt_double(sx(fx)) +
               "\" y2=\"" + fmt_double(kMarginTop + plot_h) +
               "\" stroke=\"#e0e0e0\"/>\n";
        svg += "<text x=\"" + fmt_double(sx(fx)) + "\" y=\"" +
               fmt_double(kMarginTop + plot_h + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"12\">" + fmt_double(fx, 4) + "</text>\n";
        svg += "<line x1=\"" + fmt_double(kMarginLeft) + "\" y1=\"" +
               fmt_double(sy(fy)) + "\" x2=\"" +
               fmt_double(kMarginLeft + plot_w) + "\" y2=\"" +
               fmt_double(sy(fy)) + "\" stroke=\"#e0e0e0\"/>\n";
        svg += "<text x=\"" + fmt_double(kMarginLeft - 8) + "\" y=\"" +
               fmt_double(sy(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"12\">" + fmt_double(fy, 4) + "</text>\n";
    }

    svg += "<text x=\"" + fmt_double(kMarginLeft + plot_w / 2) + "\" y=\"" +
           fmt_double(kHeight - 14) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" + escape_xml(x_label) + "</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt_double(kMarginTop + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\" transform=\"rotate(-90 20 " +
           fmt_double(kMarginTop + plot_h / 2) + ")\">" + escape_xml(y_label) +
           "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % 8];
        std::string points;
        for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
            if (!points.empty()) points += " ";
            points += fmt_double(sx(s.x[j])) + "," + fmt_double(sy(s.y[j]));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = kMarginTop + 16.0 + 18.0 * static_cast<double>(i);
        svg += "<line x1=\"" + fmt_double(kWidth - kMarginRight + 12) +
               "\" y1=\"" + fmt_double(ly - 4) + "\" x2=\"" +
               fmt_double(kWidth - kMarginRight + 36) + "\" y2=\"" +
               fmt_double(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt_double(kWidth - kMarginRight + 42) +
               "\" y=\"" + fmt_double(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape_xml(s.label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    out << render_line_chart(title, x_label, y_label, series);
}

}  // namespace semdrift
