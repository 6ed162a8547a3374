#pragma once
// Minimal deterministic SVG line charts for the trace figures. Bytes are a
// pure function of the inputs, so plots can be compared across executions.

#include <string>
#include <vector>

namespace semdrift {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string render_line_chart(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series);

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

}  // namespace semdrift
