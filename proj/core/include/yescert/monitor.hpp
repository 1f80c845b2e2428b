#pragma once

#include "yescert/config.hpp"
#include "yescert/record.hpp"

#include <json.hpp>

#include <chrono>
#include <optional>
#include <span>
#include <string>

namespace yescert {

// True iff the latest record is Green and the mean weight change over the
// window is below the threshold.
bool stop_rule(std::span<const EpochRecord> window, const StopSpec& spec);

struct PlateauEvent {
    CloudRegion region;
    double max_relative_change;
};

// Looks at the last `window_len` records; fires when every epoch-to-epoch
// relative loss change in that window is below `rel_threshold`. The event
// carries the current region so a plateau inside the cloud is its own alarm.
std::optional<PlateauEvent> plateau_detector(std::span<const EpochRecord> records, double rel_threshold,
                                             std::size_t window_len);

// base_lr * (1 + gain * min(d_k / scale, cap)). Sees only the scalar distance.
double guidance_hook(double d_k, double base_lr, const GuidanceRule& rule);

enum class ControlKind { Pause, Resume, Stop, SetLearningRate, ToggleGuidance };

std::string_view to_string(ControlKind k) noexcept;

struct ControlCommand {
    ControlKind kind = ControlKind::Pause;
    double learning_rate = 0.0; // SetLearningRate
    bool guidance = false;      // ToggleGuidance
    std::chrono::system_clock::time_point issued_at = std::chrono::system_clock::now();

    static ControlCommand pause() { return {ControlKind::Pause}; }
    static ControlCommand resume() { return {ControlKind::Resume}; }
    static ControlCommand stop() { return {ControlKind::Stop}; }
    static ControlCommand set_learning_rate(double lr) { return {ControlKind::SetLearningRate, lr}; }
    static ControlCommand toggle_guidance(bool on) { return {ControlKind::ToggleGuidance, 0.0, on}; }

    std::string describe() const;
};

// {"kind": "pause" | "resume" | "stop" | "set_learning_rate" | "toggle_guidance",
//  "value": <number> (set_learning_rate, > 0) | <bool> (toggle_guidance)}
// Throws ValidationError with a field-level message.
ControlCommand control_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ControlCommand& c);

} // namespace yescert
