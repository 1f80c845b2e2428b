#include <yescert/error.hpp>
#include <yescert/monitor.hpp>
#include <yescert/plot.hpp>
#include <yescert/record.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>

using namespace yescert;

namespace {

EpochRecord rec(std::size_t epoch, double loss, CloudRegion region = CloudRegion::Yellow, double wc = 0.0) {
    EpochRecord r;
    r.epoch = epoch;
    r.train_loss = loss;
    r.region = region;
    r.weight_change = wc;
    r.lr = 1e-3;
    return r;
}

YesBoundSet bset(double top, double bottom) {
    YesBoundSet b;
    b.yes0 = b.cloud_top = top;
    b.yes_k = b.yes_k_raw = {bottom};
    b.best_per_degree = {{2}};
    b.best_checkpoints = {2};
    b.cloud_bottom = bottom;
    b.monotone = true;
    return b;
}

std::vector<std::pair<double, double>> points_of(const std::string& svg, const std::string& id) {
    const std::regex re("<polyline id=\"" + id + "\"[^>]*points=\"([^\"]*)\"");
    std::smatch m;
    std::vector<std::pair<double, double>> pts;
    if (!std::regex_search(svg, m, re)) return pts;
    std::istringstream in(m[1].str());
    std::string tok;
    while (in >> tok) {
        const auto comma = tok.find(',');
        pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
    }
    return pts;
}

std::vector<std::pair<double, double>> path_of(const std::string& svg, const std::string& id) {
    const std::regex re("<path id=\"" + id + "\"[^>]*d=\"([^\"]*)\"");
    std::smatch m;
    std::vector<std::pair<double, double>> pts;
    if (!std::regex_search(svg, m, re)) return pts;
    const std::regex pt("[ML](-?[0-9.]+),(-?[0-9.]+)");
    const std::string d = m[1].str();
    for (auto it = std::sregex_iterator(d.begin(), d.end(), pt); it != std::sregex_iterator(); ++it)
        pts.emplace_back(std::stod((*it)[1].str()), std::stod((*it)[2].str()));
    return pts;
}

} // namespace

TEST_SUITE("monitor") {

TEST_CASE("stop rule needs green and settled weights") {
    StopSpec spec;
    spec.weight_change_threshold = 1e-5;
    std::vector<EpochRecord> w{rec(1, 1.0, CloudRegion::Green, 0.0), rec(2, 1.0, CloudRegion::Green, 0.0)};
    CHECK(stop_rule(w, spec));
    w.back().region = CloudRegion::Yellow;
    CHECK(!stop_rule(w, spec));
    w.back().region = CloudRegion::Green;
    w.back().weight_change = 1.0;
    CHECK(!stop_rule(w, spec));
    CHECK(!stop_rule(std::span<const EpochRecord>{}, spec));
}

TEST_CASE("plateau detector") {
    std::vector<EpochRecord> flat;
    for (std::size_t e = 1; e <= 10; ++e) flat.push_back(rec(e, 3.0));
    const auto ev = plateau_detector(flat, 1e-4, 10);
    REQUIRE(ev);
    CHECK(ev->region == CloudRegion::Yellow);
    CHECK(ev->max_relative_change == 0.0);
    CHECK(!plateau_detector(std::span(flat).first(5), 1e-4, 10));

    std::vector<EpochRecord> halving;
    double loss = 8.0;
    for (std::size_t e = 1; e <= 10; ++e, loss /= 2) halving.push_back(rec(e, loss));
    CHECK(!plateau_detector(halving, 1e-4, 10));

    // Only the trailing window counts.
    std::vector<EpochRecord> late = halving;
    for (std::size_t e = 11; e <= 20; ++e) late.push_back(rec(e, 0.01, CloudRegion::Red));
    const auto late_ev = plateau_detector(late, 1e-4, 10);
    REQUIRE(late_ev);
    CHECK(late_ev->region == CloudRegion::Red);
}

TEST_CASE("guidance hook") {
    GuidanceRule rule{2.0, 0.5, 1.0};
    CHECK(guidance_hook(0.0, 1e-3, rule) == 1e-3);
    CHECK(guidance_hook(0.25, 1e-3, rule) == doctest::Approx(2e-3));
    CHECK(guidance_hook(100.0, 1e-3, rule) == doctest::Approx(3e-3));
    CHECK(guidance_hook(5.0, 1e-3, GuidanceRule{0.0, 1.0, 1.0}) == 1e-3);
    double prev = 0.0;
    for (double d = 0.0; d < 3.0; d += 0.1) {
        const double lr = guidance_hook(d, 1e-3, rule);
        CHECK(lr >= prev);
        prev = lr;
    }
}

TEST_CASE("control commands parse with field-level errors") {
    CHECK(control_from_json({{"kind", "pause"}}).kind == ControlKind::Pause);
    CHECK(control_from_json({{"kind", "resume"}}).kind == ControlKind::Resume);
    CHECK(control_from_json({{"kind", "stop"}}).kind == ControlKind::Stop);
    const ControlCommand lr = control_from_json({{"kind", "set_learning_rate"}, {"value", 5e-4}});
    CHECK(lr.kind == ControlKind::SetLearningRate);
    CHECK(lr.learning_rate == 5e-4);
    CHECK(control_from_json({{"kind", "toggle_guidance"}, {"value", true}}).guidance);
    auto msg = [](const nlohmann::json& j) {
        try {
            control_from_json(j);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string("<accepted>");
    };
    CHECK(msg({{"kind", "set_learning_rate"}, {"value", 0}}).rfind("value:", 0) == 0);
    CHECK(msg({{"kind", "set_learning_rate"}, {"value", -1}}).rfind("value:", 0) == 0);
    CHECK(msg({{"kind", "set_learning_rate"}}).rfind("value:", 0) == 0);
    CHECK(msg({{"kind", "toggle_guidance"}, {"value", "yes"}}).rfind("value:", 0) == 0);
    CHECK(msg({{"kind", "jump"}}).rfind("kind:", 0) == 0);
    CHECK(msg({{"value", 1}}).rfind("kind:", 0) == 0);
    CHECK(msg(nlohmann::json::array()).rfind("body:", 0) == 0);
    CHECK(to_json(lr) == nlohmann::json{{"kind", "set_learning_rate"}, {"value", 5e-4}});
}

} // TEST_SUITE

TEST_SUITE("record") {

TEST_CASE("records round-trip through JSON exactly") {
    EpochRecord r = rec(7, 0.1 + 0.2, CloudRegion::Green, 1.0 / 3.0);
    r.bounds = bset(std::nextafter(0.5, 1.0), 0.2);
    r.lr = 9e-4 * 0.9;
    r.guidance_active = true;
    r.success_rate = 0.93;
    r.events.push_back(Event{EventKind::EnteredRegion, CloudRegion::Green, ""});
    r.events.push_back(Event{EventKind::ControlApplied, std::nullopt, "pause"});
    const EpochRecord back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
    CHECK(back.epoch == 7);
    CHECK(back.train_loss == r.train_loss);
    CHECK(back.weight_change == r.weight_change);
    CHECK(back.lr == r.lr);
    CHECK(back.region == CloudRegion::Green);
    REQUIRE(back.bounds);
    CHECK(back.bounds->cloud_top == r.bounds->cloud_top);
    CHECK(back.bounds->best_checkpoints == r.bounds->best_checkpoints);
    CHECK(back.events == r.events);
    CHECK(back.success_rate == 0.93);
    CHECK(back.guidance_active);
}

TEST_CASE("csv projection") {
    CHECK(csv_header() == "epoch,train_loss,yes0,yes_best,region,lr");
    EpochRecord r = rec(3, 0.1, CloudRegion::Red);
    r.bounds = bset(0.25, 0.125);
    CHECK(csv_line(r) == "3,0.10000000000000001,0.25,0.125,red,0.001");
    r.bounds.reset();
    CHECK(csv_line(r) == "3,0.10000000000000001,,,red,0.001");
}

TEST_CASE("run log writer and reader") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto jsonl = dir / "yescert_test_log.jsonl";
    const auto csv = dir / "yescert_test_log.csv";
    {
        RunLogWriter w(jsonl, csv, nlohmann::json{{"seed", 1}});
        EpochRecord a = rec(1, 2.0, CloudRegion::Red);
        a.bounds = bset(1.0, 0.5);
        w.append(a);
        w.append(rec(2, 1.5, CloudRegion::Red));
    }
    const RunLog log = read_run_log(jsonl);
    CHECK(log.config["seed"] == 1);
    REQUIRE(log.records.size() == 2);
    CHECK(log.records[1].train_loss == 1.5);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == csv_header());

    std::ofstream(jsonl, std::ios::app) << "{\"epoch\": oops\n";
    try {
        read_run_log(jsonl);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.offset() > 0);
    }
    std::filesystem::remove(jsonl);
    std::filesystem::remove(csv);
    CHECK_THROWS_AS(read_run_log(jsonl), IngestError);
}

TEST_CASE("display envelope is a running minimum over epochs") {
    std::vector<EpochRecord> rs;
    const double tops[] = {3.0, 2.0, 2.5, 1.0};
    const double bottoms[] = {2.0, 2.5, 1.0, 1.5};
    for (std::size_t i = 0; i < 4; ++i) {
        rs.push_back(rec(i + 1, 1.0));
        rs.back().bounds = bset(tops[i], bottoms[i]);
    }
    rs.insert(rs.begin() + 2, rec(99, 1.0)); // no bounds: skipped
    const Envelope env = monotone_envelope(rs);
    CHECK(env.top == std::vector<double>{3.0, 2.0, 2.0, 1.0});
    CHECK(env.bottom == std::vector<double>{2.0, 2.0, 1.0, 1.0});
}

} // TEST_SUITE

TEST_SUITE("plot") {

TEST_CASE("empty log gives axes only") {
    const std::string svg = render_cloud_svg({});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("id=\"axes\"") != std::string::npos);
    CHECK(svg.find("<polyline") == std::string::npos);
    CHECK(svg.find("region-") == std::string::npos);
    CHECK(svg.find("id=\"warning\"") == std::string::npos);
}

TEST_CASE("three-epoch log parses back to its points") {
    std::vector<EpochRecord> rs{rec(1, 4.0, CloudRegion::Red), rec(2, 2.0, CloudRegion::Yellow), rec(3, 1.0, CloudRegion::Green)};
    rs[0].bounds = bset(3.0, 1.5);
    rs[2].bounds = bset(2.5, 1.25);
    PlotOptions opt;
    const std::string svg = render_cloud_svg(rs, opt);
    const PlotFrame f(rs, opt);
    const auto loss = points_of(svg, "loss");
    REQUIRE(loss.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(loss[i].first == doctest::Approx(f.x(static_cast<double>(rs[i].epoch))).epsilon(1e-3));
        CHECK(loss[i].second == doctest::Approx(f.y(rs[i].train_loss)).epsilon(1e-3));
    }
    CHECK(points_of(svg, "yes0").size() == 2);
    CHECK(points_of(svg, "yes-best").size() == 2);
    CHECK(svg.find("id=\"warning\"") == std::string::npos);
}

TEST_CASE("shading edges sit on the bound values with step interpolation") {
    std::vector<EpochRecord> rs;
    for (std::size_t e = 1; e <= 6; ++e) rs.push_back(rec(e, 5.0 - static_cast<double>(e) * 0.5));
    rs[0].bounds = bset(4.0, 2.0);
    rs[3].bounds = bset(3.0, 1.0);
    for (bool log_scale : {false, true}) {
        PlotOptions opt;
        opt.log_scale = log_scale;
        const std::string svg = render_cloud_svg(rs, opt);
        const PlotFrame f(rs, opt);
        // The yellow path runs forward along the top edge and back along the bottom.
        const auto yellow = path_of(svg, "region-yellow");
        REQUIRE(yellow.size() == 24);
        for (std::size_t i = 0; i < 6; ++i) {
            const double top = i < 3 ? 4.0 : 3.0;
            const double bottom = i < 3 ? 2.0 : 1.0;
            CHECK(yellow[2 * i].second == doctest::Approx(f.y(top)).epsilon(1e-4));
            CHECK(yellow[2 * i + 1].second == doctest::Approx(f.y(top)).epsilon(1e-4));
            CHECK(yellow[23 - 2 * i].second == doctest::Approx(f.y(bottom)).epsilon(1e-4));
            CHECK(yellow[2 * i].first == doctest::Approx(f.x(static_cast<double>(i + 1))).epsilon(1e-4));
        }
        CHECK(!path_of(svg, "region-red").empty());
        CHECK(!path_of(svg, "region-green").empty());
    }
}

TEST_CASE("logs without bounds plot the loss with a warning") {
    std::vector<EpochRecord> rs{rec(1, 2.0), rec(2, 1.0)};
    const std::string svg = render_cloud_svg(rs);
    CHECK(points_of(svg, "loss").size() == 2);
    CHECK(svg.find("id=\"warning\"") != std::string::npos);
    CHECK(svg.find("region-") == std::string::npos);
}

TEST_CASE("output is identical for identical logs") {
    std::vector<EpochRecord> rs{rec(1, 2.0), rec(2, 1.0)};
    rs[0].bounds = bset(1.5, 0.75);
    CHECK(render_cloud_svg(rs) == render_cloud_svg(rs));
}

} // TEST_SUITE
