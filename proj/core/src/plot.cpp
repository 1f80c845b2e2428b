#include "yescert/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace yescert {

namespace {

constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 50.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

bool usable(double v, bool log_scale) { return std::isfinite(v) && (!log_scale || v > 0.0); }

// Bounds carried forward between cadence epochs.
struct Step {
    double epoch;
    double top;
    double bottom;
};

std::vector<Step> cloud_steps(const std::vector<EpochRecord>& records) {
    std::vector<Step> steps;
    const YesBoundSet* current = nullptr;
    for (const auto& r : records) {
        if (r.bounds) current = &*r.bounds;
        if (current) steps.push_back({static_cast<double>(r.epoch), current->cloud_top, current->cloud_bottom});
    }
    return steps;
}

} // namespace

PlotFrame::PlotFrame(const std::vector<EpochRecord>& records, const PlotOptions& options)
    : left_(kMarginLeft), right_(options.width - kMarginRight), top_(kMarginTop),
      bottom_(options.height - kMarginBottom), log_(options.log_scale) {
    if (!records.empty()) {
        x_min_ = static_cast<double>(records.front().epoch);
        x_max_ = static_cast<double>(records.back().epoch);
        if (x_max_ <= x_min_) x_max_ = x_min_ + 1.0;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto take = [&](double v) {
        if (!usable(v, log_)) return;
        const double t = transform(v);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    };
    for (const auto& r : records) {
        take(r.train_loss);
        if (r.bounds) {
            take(r.bounds->cloud_top);
            take(r.bounds->cloud_bottom);
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    y_min_ = lo - pad;
    y_max_ = hi + pad;
}

double PlotFrame::transform(double v) const { return log_ ? std::log10(v) : v; }

double PlotFrame::x(double epoch) const { return left_ + (epoch - x_min_) / (x_max_ - x_min_) * (right_ - left_); }

double PlotFrame::y(double value) const {
    double t = usable(value, log_) ? transform(value) : y_min_;
    t = std::clamp(t, y_min_, y_max_);
    return bottom_ - (t - y_min_) / (y_max_ - y_min_) * (bottom_ - top_);
}

std::string render_cloud_svg(const std::vector<EpochRecord>& records, const PlotOptions& options) {
    const PlotFrame f(records, options);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
        << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\"" << options.height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(f.left()) << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\">" << options.title
        << "</text>\n";

    // Shading.
    const std::vector<Step> steps = cloud_steps(records);
    if (!steps.empty()) {
        // Each step spans [epoch_i, epoch_{i+1}); the last one is a vertical edge.
        auto stepped = [&](auto value_of, bool reverse) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < steps.size(); ++i) {
                const double x0 = f.x(steps[i].epoch);
                const double x1 = i + 1 < steps.size() ? f.x(steps[i + 1].epoch) : x0;
                const double yv = f.y(value_of(steps[i]));
                pts.emplace_back(x0, yv);
                pts.emplace_back(x1, yv);
            }
            if (reverse) std::reverse(pts.begin(), pts.end());
            std::string s;
            for (const auto& [px, py] : pts) s += " L" + num(px) + "," + num(py);
            return s;
        };
        const auto top_of = [](const Step& s) { return s.top; };
        const auto bottom_of = [](const Step& s) { return s.bottom; };
        const double xs = f.x(steps.front().epoch);
        const double xe = f.x(steps.back().epoch);
        svg << "<g id=\"cloud\">\n";
        svg << "<path id=\"region-red\" fill=\"" << options.red << "\" d=\"M" << num(xs) << "," << num(f.top()) << " L"
            << num(xe) << "," << num(f.top()) << stepped(top_of, true) << " Z\"/>\n";
        std::string yellow = stepped(top_of, false);
        yellow[1] = 'M';
        svg << "<path id=\"region-yellow\" fill=\"" << options.yellow << "\" d=\"" << yellow.substr(1)
            << stepped(bottom_of, true) << " Z\"/>\n";
        std::string green = stepped(bottom_of, false);
        green[1] = 'M';
        svg << "<path id=\"region-green\" fill=\"" << options.green << "\" d=\"" << green.substr(1) << " L" << num(xe)
            << "," << num(f.bottom()) << " L" << num(xs) << "," << num(f.bottom()) << " Z\"/>\n";
        svg << "</g>\n";
    }

    // Axes and ticks.
    svg << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<line x1=\"" << num(f.left()) << "\" y1=\"" << num(f.bottom()) << "\" x2=\"" << num(f.right()) << "\" y2=\""
        << num(f.bottom()) << "\"/>\n";
    svg << "<line x1=\"" << num(f.left()) << "\" y1=\"" << num(f.top()) << "\" x2=\"" << num(f.left()) << "\" y2=\""
        << num(f.bottom()) << "\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double e = f.x_min() + (f.x_max() - f.x_min()) * i / 4.0;
        const double px = f.x(e);
        svg << "<text x=\"" << num(px) << "\" y=\"" << num(f.bottom() + 18) << "\" text-anchor=\"middle\" stroke=\"none\">"
            << label(e) << "</text>\n";
        const double t = f.y_min() + (f.y_max() - f.y_min()) * i / 4.0;
        const double value = f.log_scale() ? std::pow(10.0, t) : t;
        const double py = f.bottom() - (t - f.y_min()) / (f.y_max() - f.y_min()) * (f.bottom() - f.top());
        svg << "<text x=\"" << num(f.left() - 6) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\" stroke=\"none\">"
            << label(value) << "</text>\n";
    }
    svg << "<text x=\"" << num((f.left() + f.right()) / 2) << "\" y=\"" << num(f.bottom() + 38)
        << "\" text-anchor=\"middle\" stroke=\"none\">epoch</text>\n";
    svg << "<text x=\"16\" y=\"" << num((f.top() + f.bottom()) / 2) << "\" text-anchor=\"middle\" stroke=\"none\" transform=\"rotate(-90 16 "
        << num((f.top() + f.bottom()) / 2) << ")\">" << (f.log_scale() ? "loss (log)" : "loss") << "</text>\n";
    svg << "</g>\n";

    // Curves.
    auto polyline = [&](const char* id, const char* color, auto pick) {
        std::string pts;
        for (const auto& r : records) {
            const std::optional<double> v = pick(r);
            if (!v || !usable(*v, f.log_scale())) continue;
            if (!pts.empty()) pts += ' ';
            pts += num(f.x(static_cast<double>(r.epoch))) + "," + num(f.y(*v));
        }
        if (pts.empty()) return;
        svg << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
            << "\"/>\n";
    };
    polyline("yes0", "#b22222", [](const EpochRecord& r) -> std::optional<double> {
        return r.bounds ? std::optional(r.bounds->cloud_top) : std::nullopt;
    });
    polyline("yes-best", "#2e8b57", [](const EpochRecord& r) -> std::optional<double> {
        return r.bounds ? std::optional(r.bounds->cloud_bottom) : std::nullopt;
    });
    polyline("loss", "#1f3b8f", [](const EpochRecord& r) -> std::optional<double> { return r.train_loss; });

    if (!records.empty() && steps.empty()) {
        svg << "<text id=\"warning\" x=\"" << num(f.right()) << "\" y=\"22\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"12\" fill=\"#b22222\">no bound values in log; plotting loss only</text>\n";
    }

    // Legend.
    svg << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
    const char* names[] = {"training loss", "YES-0 (cloud top)", "best YES-k (cloud bottom)"};
    const char* colors[] = {"#1f3b8f", "#b22222", "#2e8b57"};
    for (int i = 0; i < 3; ++i) {
        const double lx = f.right() - 170;
        const double ly = f.top() + 14 + 14 * i;
        svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 18) << "\" y2=\"" << num(ly - 4)
            << "\" stroke=\"" << colors[i] << "\" stroke-width=\"2\"/>";
        svg << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(ly) << "\">" << names[i] << "</text>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

} // namespace yescert
