#pragma once

#include "yescert/record.hpp"

#include <string>
#include <vector>

namespace yescert {

struct PlotOptions {
    bool log_scale = false;
    int width = 800;
    int height = 480;
    std::string red = "#f4b6b6";
    std::string yellow = "#f7e3a1";
    std::string green = "#b9e4c2";
    std::string title = "YES training cloud";
};

// Data-to-pixel mapping shared by the renderer and by tests that read the
// SVG back.
class PlotFrame {
public:
    PlotFrame(const std::vector<EpochRecord>& records, const PlotOptions& options);

    double x(double epoch) const;
    double y(double value) const;
    double left() const noexcept { return left_; }
    double right() const noexcept { return right_; }
    double top() const noexcept { return top_; }
    double bottom() const noexcept { return bottom_; }
    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    double y_min() const noexcept { return y_min_; }
    double y_max() const noexcept { return y_max_; }
    bool log_scale() const noexcept { return log_; }

private:
    double transform(double v) const;

    double left_, right_, top_, bottom_;
    double x_min_ = 0.0, x_max_ = 1.0;
    double y_min_ = 0.0, y_max_ = 1.0; // in transformed units
    bool log_;
};

// Deterministic SVG: loss polyline (id "loss"), YES-0 polyline ("yes0"), best
// bound polyline ("yes-best"), and red/yellow/green shading paths with step
// interpolation between cadence epochs. Logs without any bounds get the loss
// curve plus a <text id="warning"> element.
std::string render_cloud_svg(const std::vector<EpochRecord>& records, const PlotOptions& options = {});

} // namespace yescert
