#include "yescert/record.hpp"

#include "yescert/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace yescert {

using nlohmann::json;

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
    case EventKind::EnteredRegion: return "entered_region";
    case EventKind::PlateauDetected: return "plateau_detected";
    case EventKind::Stopped: return "stopped";
    case EventKind::ControlApplied: return "control_applied";
    case EventKind::Diverged: return "diverged";
    }
    return "entered_region";
}

EventKind event_from_string(std::string_view s) {
    if (s == "entered_region") return EventKind::EnteredRegion;
    if (s == "plateau_detected") return EventKind::PlateauDetected;
    if (s == "stopped") return EventKind::Stopped;
    if (s == "control_applied") return EventKind::ControlApplied;
    if (s == "diverged") return EventKind::Diverged;
    throw ValidationError("unknown event kind '" + std::string(s) + "'");
}

bool EpochRecord::has_event(EventKind k) const {
    return std::any_of(events.begin(), events.end(), [k](const Event& e) { return e.kind == k; });
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& v) { return v.is_null() ? std::nan("") : v.get<double>(); }

} // namespace

json to_json(const YesBoundSet& b) {
    return json{
        {"yes0", b.yes0},
        {"yes_k", b.yes_k},
        {"yes_k_raw", b.yes_k_raw},
        {"best_per_degree", b.best_per_degree},
        {"monotone", b.monotone},
        {"cloud_top", b.cloud_top},
        {"cloud_bottom", b.cloud_bottom},
        {"best_checkpoints", b.best_checkpoints},
    };
}

YesBoundSet bounds_from_json(const json& j) {
    YesBoundSet b;
    b.yes0 = j.at("yes0").get<double>();
    b.yes_k = j.at("yes_k").get<std::vector<double>>();
    b.yes_k_raw = j.at("yes_k_raw").get<std::vector<double>>();
    b.best_per_degree = j.at("best_per_degree").get<std::vector<CheckpointSet>>();
    b.monotone = j.at("monotone").get<bool>();
    b.cloud_top = j.at("cloud_top").get<double>();
    b.cloud_bottom = j.at("cloud_bottom").get<double>();
    b.best_checkpoints = j.at("best_checkpoints").get<CheckpointSet>();
    return b;
}

json to_json(const EpochRecord& r) {
    json events = json::array();
    for (const auto& e : r.events) {
        json ev{{"kind", to_string(e.kind)}};
        if (e.region) ev["region"] = to_string(*e.region);
        if (!e.detail.empty()) ev["detail"] = e.detail;
        events.push_back(std::move(ev));
    }
    json j{
        {"epoch", r.epoch},
        {"train_loss", number_or_null(r.train_loss)},
        {"bounds", r.bounds ? to_json(*r.bounds) : json(nullptr)},
        {"region", to_string(r.region)},
        {"region_stale", r.region_stale},
        {"lr", r.lr},
        {"weight_change", number_or_null(r.weight_change)},
        {"wall_time_ms", r.wall_time_ms},
        {"guidance_active", r.guidance_active},
        {"events", std::move(events)},
    };
    if (r.success_rate) j["success_rate"] = *r.success_rate;
    return j;
}

EpochRecord record_from_json(const json& j) {
    EpochRecord r;
    r.epoch = j.at("epoch").get<std::size_t>();
    r.train_loss = number_from(j.at("train_loss"));
    if (!j.at("bounds").is_null()) r.bounds = bounds_from_json(j.at("bounds"));
    r.region = region_from_string(j.at("region").get<std::string>());
    r.region_stale = j.at("region_stale").get<bool>();
    r.lr = j.at("lr").get<double>();
    r.weight_change = number_from(j.at("weight_change"));
    r.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
    r.guidance_active = j.at("guidance_active").get<bool>();
    if (j.contains("success_rate")) r.success_rate = j.at("success_rate").get<double>();
    for (const auto& ev : j.at("events")) {
        Event e;
        e.kind = event_from_string(ev.at("kind").get<std::string>());
        if (ev.contains("region")) e.region = region_from_string(ev.at("region").get<std::string>());
        if (ev.contains("detail")) e.detail = ev.at("detail").get<std::string>();
        r.events.push_back(std::move(e));
    }
    return r;
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string csv_header() { return "epoch,train_loss,yes0,yes_best,region,lr"; }

std::string csv_line(const EpochRecord& r) {
    std::string line = std::to_string(r.epoch) + "," + g17(r.train_loss) + ",";
    if (r.bounds) line += g17(r.bounds->yes0) + "," + g17(r.bounds->cloud_bottom);
    else line += ",";
    line += ",";
    line += to_string(r.region);
    line += "," + g17(r.lr);
    return line;
}

RunLogWriter::RunLogWriter(const std::filesystem::path& jsonl, const std::filesystem::path& csv, const json& config) {
    if (!jsonl.empty()) {
        jsonl_.open(jsonl, std::ios::trunc);
        if (!jsonl_) throw IoError("cannot open run log " + jsonl.string());
        jsonl_ << json{{"type", "header"}, {"config", config}}.dump() << '\n';
        jsonl_.flush();
    }
    if (!csv.empty()) {
        csv_.open(csv, std::ios::trunc);
        if (!csv_) throw IoError("cannot open CSV log " + csv.string());
        csv_ << csv_header() << '\n';
        csv_.flush();
    }
}

void RunLogWriter::append(const EpochRecord& r) {
    if (jsonl_.is_open()) {
        json j = to_json(r);
        j["type"] = "epoch";
        jsonl_ << j.dump() << '\n';
        jsonl_.flush();
    }
    if (csv_.is_open()) {
        csv_ << csv_line(r) << '\n';
        csv_.flush();
    }
}

RunLog read_run_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open run log " + path.string(), 0);
    RunLog log;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const std::string type = j.value("type", "epoch");
            if (type == "header") log.config = j.at("config");
            else log.records.push_back(record_from_json(j));
        } catch (const std::exception& e) {
            throw IngestError("run log " + path.string() + ": malformed line: " + e.what(), line_start);
        }
    }
    return log;
}

Envelope monotone_envelope(const std::vector<EpochRecord>& records) {
    Envelope env;
    double top = std::numeric_limits<double>::infinity();
    double bottom = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (!r.bounds) continue;
        top = std::min(top, r.bounds->cloud_top);
        bottom = std::min(bottom, r.bounds->cloud_bottom);
        env.epochs.push_back(r.epoch);
        env.top.push_back(top);
        env.bottom.push_back(bottom);
    }
    return env;
}

} // namespace yescert
