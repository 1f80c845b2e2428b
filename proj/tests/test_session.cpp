#include "support/fixtures.hpp"

#include <yescert/session.hpp>

#include <doctest.h>

#include <cmath>
#include <thread>

using namespace yescert;

namespace {

std::size_t count_events(const std::vector<EpochRecord>& rs, EventKind k) {
    std::size_t n = 0;
    for (const auto& r : rs)
        for (const auto& e : r.events) n += e.kind == k;
    return n;
}

// Spins until the session reports `state` (or a terminal state).
void await_state(const Session& s, SessionState state) {
    for (int i = 0; i < 20000; ++i) {
        const SessionState now = s.status().state;
        if (now == state || is_terminal(now)) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
}

} // namespace

TEST_SUITE("session") {

TEST_CASE("same config gives bitwise-identical runs") {
    Session a(fixture::small_denoising(12));
    Session b(fixture::small_denoising(12));
    const RunResult ra = a.run();
    const RunResult rb = b.run();
    REQUIRE(ra.records.size() == rb.records.size());
    for (std::size_t i = 0; i < ra.records.size(); ++i) {
        CHECK(csv_line(ra.records[i]) == csv_line(rb.records[i]));
        CHECK(ra.records[i].weight_change == rb.records[i].weight_change);
    }
    CHECK(fixture::flatten(ra.params) == fixture::flatten(rb.params));
}

TEST_CASE("zero epochs give an empty log and the initial weights") {
    fixture::TempDir dir("session_zero");
    SessionConfig c = fixture::small_denoising(0);
    c.output.jsonl = (dir / "run.jsonl").string();
    c.output.csv = (dir / "run.csv").string();
    Session s(c);
    const RunResult r = s.run();
    CHECK(r.records.empty());
    CHECK(r.state == SessionState::Finished);
    CHECK(fixture::flatten(r.params) == fixture::flatten(s.initial_params()));
    const RunLog log = read_run_log(c.output.jsonl);
    CHECK(log.records.empty());
    CHECK(log.config == config_to_json(c));
    CHECK(fixture::slurp(c.output.csv) == csv_header() + "\n");
}

TEST_CASE("the log holds one complete record per epoch") {
    fixture::TempDir dir("session_log");
    SessionConfig c = fixture::small_denoising(80);
    c.optimizer.lr = 1e-3;
    c.output.jsonl = (dir / "run.jsonl").string();
    Session s(c);
    const RunResult r = s.run();
    REQUIRE(r.records.size() == 80);
    const RunLog log = read_run_log(c.output.jsonl);
    REQUIRE(log.records.size() == 80);
    std::optional<std::size_t> first_yellow, first_green;
    for (std::size_t i = 0; i < 80; ++i) {
        const EpochRecord& rec = log.records[i];
        CHECK(rec.epoch == i + 1);
        CHECK(std::isfinite(rec.train_loss));
        CHECK(rec.train_loss >= 0.0);
        CHECK(rec.lr > 0.0);
        CHECK(rec.weight_change >= 0.0);
        REQUIRE(rec.bounds);
        const YesBoundSet& b = *rec.bounds;
        CHECK(b.cloud_bottom <= b.cloud_top);
        CHECK(b.best_checkpoints.size() <= s.max_degree());
        CHECK(rec.region == classify_region(rec.train_loss, b));
        CHECK(to_json(rec) == to_json(r.records[i]));
        if (rec.region == CloudRegion::Yellow && !first_yellow) first_yellow = rec.epoch;
        if (rec.region == CloudRegion::Green && !first_green) first_green = rec.epoch;
    }
    CHECK(log.records.front().region == CloudRegion::Red);
    CHECK(log.records.front().has_event(EventKind::EnteredRegion));
    REQUIRE(first_yellow);
    REQUIRE(first_green);
    CHECK(*first_green > *first_yellow);
}

TEST_CASE("bounds follow the cadence and regions carry forward") {
    SessionConfig c = fixture::small_denoising(10);
    c.bounds.cadence = 4;
    Session s(c);
    const RunResult r = s.run();
    for (const auto& rec : r.records) {
        const bool cadence = rec.epoch == 1 || rec.epoch % 4 == 0;
        CHECK(rec.bounds.has_value() == cadence);
        CHECK(rec.region_stale == !cadence);
    }
    CHECK(r.records[1].region == r.records[0].region);
    CHECK(r.records[4].region == r.records[3].region);
}

TEST_CASE("learning-rate change lands on the announced epoch") {
    SessionConfig c = fixture::small_denoising(200);
    Session s(c);
    std::thread runner;
    auto sub = s.subscribe();
    runner = std::thread([&] { s.run(); });
    const auto first = sub->next(std::chrono::seconds(30));
    REQUIRE(first);
    const std::size_t applies = s.submit(ControlCommand::set_learning_rate(5e-4));
    CHECK(applies >= first->epoch + 1);
    std::optional<EpochRecord> hit;
    while (auto rec = sub->next(std::chrono::seconds(30))) {
        if (rec->epoch == applies) {
            hit = rec;
            break;
        }
        CHECK(rec->lr != 5e-4);
    }
    REQUIRE(hit);
    CHECK(hit->lr == 5e-4);
    CHECK(hit->has_event(EventKind::ControlApplied));
    s.submit(ControlCommand::stop());
    runner.join();
    CHECK(s.status().state == SessionState::Stopped);
    CHECK_THROWS_AS(s.submit(ControlCommand::pause()), SessionClosed);
}

TEST_CASE("pause holds training until resume") {
    Session s(fixture::small_denoising(6));
    s.submit(ControlCommand::pause());
    std::thread runner([&] { s.run(); });
    await_state(s, SessionState::Paused);
    CHECK(s.status().state == SessionState::Paused);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK(s.status().completed_epochs == 0);
    CHECK(s.submit(ControlCommand::resume()) == 1);
    runner.join();
    const auto rs = s.records_from(0);
    CHECK(rs.size() == 6);
    CHECK(count_events(rs, EventKind::ControlApplied) == 2);
    CHECK(s.status().state == SessionState::Finished);
    CHECK(s.records_from(4).size() == 3);
}

TEST_CASE("stop ends the run at the next boundary") {
    Session s(fixture::small_denoising(1000));
    auto sub = s.subscribe();
    std::thread runner([&] { s.run(); });
    REQUIRE(sub->next(std::chrono::seconds(30)));
    const std::size_t at = s.submit(ControlCommand::stop());
    runner.join();
    CHECK(s.status().state == SessionState::Stopped);
    CHECK(s.status().completed_epochs == at - 1);
    while (sub->next(std::chrono::milliseconds(10))) {}
    CHECK(sub->closed());
    CHECK(!sub->overflowed());
}

TEST_CASE("the stop rule ends a settled green run") {
    SessionConfig c = fixture::small_denoising(300);
    c.stop.enabled = true;
    c.stop.weight_change_threshold = 1e9; // any green window qualifies
    c.stop.window = 3;
    Session s(c);
    const RunResult r = s.run();
    REQUIRE(!r.records.empty());
    CHECK(r.state == SessionState::Stopped);
    CHECK(r.records.back().has_event(EventKind::Stopped));
    CHECK(r.records.back().region == CloudRegion::Green);
}

TEST_CASE("monitoring does not touch the trajectory unless guidance is on") {
    const auto trajectory = [](bool corrupt, bool guidance) {
        SessionConfig c = fixture::small_denoising(15);
        c.guidance.enabled = guidance;
        Session s(c);
        if (corrupt) {
            s.set_bound_observer([](YesBoundSet& b) {
                b.cloud_top *= 7.0;
                b.cloud_bottom = 0.0;
                b.yes0 = -1.0;
            });
        }
        return s.run();
    };
    const RunResult clean = trajectory(false, false);
    const RunResult corrupted = trajectory(true, false);
    REQUIRE(clean.records.size() == corrupted.records.size());
    for (std::size_t i = 0; i < clean.records.size(); ++i) {
        CHECK(clean.records[i].train_loss == corrupted.records[i].train_loss);
        CHECK(clean.records[i].lr == corrupted.records[i].lr);
        CHECK(clean.records[i].weight_change == corrupted.records[i].weight_change);
    }
    CHECK(fixture::flatten(clean.params) == fixture::flatten(corrupted.params));

    const RunResult guided = trajectory(false, true);
    CHECK(fixture::flatten(guided.params) != fixture::flatten(clean.params));
    CHECK(guided.records[0].lr == clean.records[0].lr);
    CHECK(guided.records[1].lr > clean.records[1].lr);
}

TEST_CASE("a runaway learning rate is reported as divergence") {
    SessionConfig c = fixture::small_denoising(50);
    c.optimizer.kind = OptimizerKind::SGD;
    c.optimizer.lr = 1e6;
    Session s(c);
    const RunResult r = s.run();
    CHECK(r.state == SessionState::Diverged);
    REQUIRE(!r.records.empty());
    CHECK(r.records.back().has_event(EventKind::Diverged));
    CHECK(std::isnan(r.records.back().train_loss));
    CHECK(r.records.size() < 50);
}

TEST_CASE("slow subscribers are dropped instead of stalling training") {
    Session s(fixture::small_denoising(8));
    auto slow = s.subscribe(3);
    auto roomy = s.subscribe(100);
    s.run();
    CHECK(slow->overflowed());
    CHECK(slow->closed());
    CHECK(!slow->next(std::chrono::milliseconds(1)));
    std::size_t got = 0;
    while (roomy->next(std::chrono::milliseconds(1))) ++got;
    CHECK(got == 8);
    CHECK(!roomy->overflowed());
    // Subscribing after the end yields an already-closed feed.
    CHECK(s.subscribe()->closed());
}

TEST_CASE("invalid configurations are rejected before training") {
    SessionConfig c = fixture::small_denoising(5);
    c.batch_size = 101;
    CHECK_THROWS_AS(Session{c}, ConfigError);
    c = fixture::small_denoising(5);
    c.bounds.max_degree = 9;
    CHECK_THROWS_AS(Session{c}, ConfigError);
}

TEST_CASE("weights snapshot") {
    const nlohmann::json j = params_to_json(init_params(std::vector<std::size_t>{2, 3, 1}, true,
                                                        std::vector<Activation>{Activation::ReLU, Activation::Identity}, 1));
    REQUIRE(j["layers"].size() == 2);
    CHECK(j["layers"][0]["weight"].size() == 3);
    CHECK(j["layers"][0]["weight"][0].size() == 2);
    CHECK(j["layers"][1]["bias"].size() == 1);
    CHECK(j["layers"][1]["activation"] == "identity");
}

} // TEST_SUITE
