#pragma once

#include "yescert/bounds.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace yescert {

enum class EventKind { EnteredRegion, PlateauDetected, Stopped, ControlApplied, Diverged };

std::string_view to_string(EventKind k) noexcept;
EventKind event_from_string(std::string_view s);

struct Event {
    EventKind kind = EventKind::EnteredRegion;
    std::optional<CloudRegion> region;
    std::string detail;

    friend bool operator==(const Event&, const Event&) = default;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0; // /d-normalized; NaN once diverged
    std::optional<YesBoundSet> bounds; // present on cadence epochs only
    CloudRegion region = CloudRegion::Red;
    bool region_stale = false; // carried forward from the last cadence epoch
    double lr = 0.0;
    double weight_change = 0.0;
    std::int64_t wall_time_ms = 0;
    bool guidance_active = false;
    std::optional<double> success_rate; // classification tasks only
    std::vector<Event> events;

    bool has_event(EventKind k) const;
};

nlohmann::json to_json(const YesBoundSet& b);
YesBoundSet bounds_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EpochRecord& r);
EpochRecord record_from_json(const nlohmann::json& j);

// CSV projection: epoch,train_loss,yes0,yes_best,region,lr. Floats use 17
// significant digits; yes0/yes_best are empty on epochs without bounds.
std::string csv_header();
std::string csv_line(const EpochRecord& r);

// JSONL run log: first line {"type":"header","config":{...}}, then one
// {"type":"epoch", ...record} line per epoch.
class RunLogWriter {
public:
    RunLogWriter() = default;
    RunLogWriter(const std::filesystem::path& jsonl, const std::filesystem::path& csv, const nlohmann::json& config);

    void append(const EpochRecord& r);

private:
    std::ofstream jsonl_;
    std::ofstream csv_;
};

struct RunLog {
    nlohmann::json config;
    std::vector<EpochRecord> records;
};

// Throws IngestError (with byte offset) on malformed lines.
RunLog read_run_log(const std::filesystem::path& jsonl);

// Running minimum of the bounds over epochs, evaluated at read time for
// display; raw values in the records are left untouched.
struct Envelope {
    std::vector<std::size_t> epochs;
    std::vector<double> top;
    std::vector<double> bottom;
};
Envelope monotone_envelope(const std::vector<EpochRecord>& records);

} // namespace yescert
