#include "yescert/monitor.hpp"

#include "yescert/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace yescert {

bool stop_rule(std::span<const EpochRecord> window, const StopSpec& spec) {
    if (window.empty()) return false;
    if (window.back().region != CloudRegion::Green) return false;
    double total = 0.0;
    for (const auto& r : window) total += r.weight_change;
    const double mean = total / static_cast<double>(window.size());
    return mean < spec.weight_change_threshold;
}

std::optional<PlateauEvent> plateau_detector(std::span<const EpochRecord> records, double rel_threshold,
                                             std::size_t window_len) {
    if (window_len < 2 || records.size() < window_len) return std::nullopt;
    const auto window = records.subspan(records.size() - window_len);
    double worst = 0.0;
    for (std::size_t i = 1; i < window.size(); ++i) {
        const double prev = window[i - 1].train_loss;
        const double cur = window[i].train_loss;
        if (!std::isfinite(prev) || !std::isfinite(cur)) return std::nullopt;
        const double denom = std::max(std::abs(prev), 1e-300);
        worst = std::max(worst, std::abs(cur - prev) / denom);
    }
    if (worst >= rel_threshold) return std::nullopt;
    return PlateauEvent{window.back().region, worst};
}

double guidance_hook(double d_k, double base_lr, const GuidanceRule& rule) {
    const double scaled = std::min(std::max(d_k, 0.0) / rule.scale, rule.cap);
    return base_lr * (1.0 + rule.gain * scaled);
}

std::string_view to_string(ControlKind k) noexcept {
    switch (k) {
    case ControlKind::Pause: return "pause";
    case ControlKind::Resume: return "resume";
    case ControlKind::Stop: return "stop";
    case ControlKind::SetLearningRate: return "set_learning_rate";
    case ControlKind::ToggleGuidance: return "toggle_guidance";
    }
    return "pause";
}

std::string ControlCommand::describe() const {
    std::ostringstream os;
    os << to_string(kind);
    if (kind == ControlKind::SetLearningRate) {
        os.precision(17);
        os << "=" << learning_rate;
    }
    if (kind == ControlKind::ToggleGuidance) os << "=" << (guidance ? "on" : "off");
    return os.str();
}

ControlCommand control_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("body: expected a JSON object");
    const auto kind_it = j.find("kind");
    if (kind_it == j.end() || !kind_it->is_string()) throw ValidationError("kind: required string field");
    const std::string kind = kind_it->get<std::string>();
    ControlCommand c;
    if (kind == "pause") {
        c.kind = ControlKind::Pause;
    } else if (kind == "resume") {
        c.kind = ControlKind::Resume;
    } else if (kind == "stop") {
        c.kind = ControlKind::Stop;
    } else if (kind == "set_learning_rate") {
        c.kind = ControlKind::SetLearningRate;
        const auto v = j.find("value");
        if (v == j.end() || !v->is_number()) throw ValidationError("value: set_learning_rate needs a numeric value");
        c.learning_rate = v->get<double>();
        if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
            throw ValidationError("value: learning rate must be a finite number > 0");
        }
    } else if (kind == "toggle_guidance") {
        c.kind = ControlKind::ToggleGuidance;
        const auto v = j.find("value");
        if (v == j.end() || !v->is_boolean()) throw ValidationError("value: toggle_guidance needs a boolean value");
        c.guidance = v->get<bool>();
    } else {
        throw ValidationError("kind: unknown command '" + kind + "'");
    }
    return c;
}

nlohmann::json to_json(const ControlCommand& c) {
    nlohmann::json j{{"kind", to_string(c.kind)}};
    if (c.kind == ControlKind::SetLearningRate) j["value"] = c.learning_rate;
    if (c.kind == ControlKind::ToggleGuidance) j["value"] = c.guidance;
    return j;
}

} // namespace yescert
