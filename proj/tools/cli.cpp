#include "cli.hpp"

#include <yescert/config.hpp>
#include <yescert/plot.hpp>
#include <yescert/record.hpp>
#include <yescert/service.hpp>
#include <yescert/session.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace yescert::cli {

namespace {

using nlohmann::json;

std::atomic<bool> g_signalled{false};

extern "C" void on_signal(int) { g_signalled = true; }

struct Overrides {
    std::string config_path;
    std::optional<double> lr;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> epochs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> task;
    std::optional<std::vector<std::size_t>> layers;
    std::optional<std::size_t> bound_cadence;
    std::optional<std::size_t> max_degree;
    std::optional<bool> guidance;
    std::optional<std::string> jsonl;
    std::optional<std::string> csv;
    std::optional<std::string> weights;
};

void add_run_options(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config_path, "JSON session config");
    cmd.add_option("--lr", o.lr, "optimizer.lr");
    cmd.add_option("--batch-size", o.batch_size, "batch_size");
    cmd.add_option("--epochs", o.epochs, "max_epochs");
    cmd.add_option("--seed", o.seed, "seed (initialization and shuffling)");
    cmd.add_option("--task", o.task, "task.kind");
    cmd.add_option("--layers", o.layers, "network.layers, comma separated")->delimiter(',');
    cmd.add_option("--bound-cadence", o.bound_cadence, "bounds.cadence");
    cmd.add_option("--max-degree", o.max_degree, "bounds.max_degree");
    cmd.add_option("--guidance", o.guidance, "guidance.enabled (true/false)");
    cmd.add_option("--jsonl", o.jsonl, "output.jsonl");
    cmd.add_option("--csv", o.csv, "output.csv");
    cmd.add_option("--weights", o.weights, "output.weights");
}

SessionConfig effective_config(const Overrides& o) {
    SessionConfig c = o.config_path.empty() ? SessionConfig{} : load_config(o.config_path);
    if (o.task) c.task.kind = task_from_string(*o.task);
    if (o.lr) c.optimizer.lr = *o.lr;
    if (o.batch_size) c.batch_size = *o.batch_size;
    if (o.epochs) c.max_epochs = *o.epochs;
    if (o.seed) c.seed = *o.seed;
    if (o.layers) c.network.layers = *o.layers;
    if (o.bound_cadence) c.bounds.cadence = *o.bound_cadence;
    if (o.max_degree) c.bounds.max_degree = *o.max_degree;
    if (o.guidance) c.guidance.enabled = *o.guidance;
    if (o.jsonl) c.output.jsonl = *o.jsonl;
    if (o.csv) c.output.csv = *o.csv;
    if (o.weights) c.output.weights = *o.weights;
    return c;
}

json summary(const RunResult& r) {
    json s;
    s["state"] = std::string(to_string(r.state));
    s["epochs"] = r.records.size();
    s["final_region"] = nullptr;
    s["first_green_epoch"] = nullptr;
    s["final_loss"] = nullptr;
    if (!r.records.empty()) {
        const EpochRecord& last = r.records.back();
        s["final_region"] = std::string(to_string(last.region));
        s["final_loss"] = std::isfinite(last.train_loss) ? json(last.train_loss) : json(nullptr);
        s["final_lr"] = last.lr;
        if (last.success_rate) s["final_success_rate"] = *last.success_rate;
    }
    for (const auto& rec : r.records) {
        if (rec.region == CloudRegion::Green) {
            s["first_green_epoch"] = rec.epoch;
            break;
        }
    }
    return s;
}

// Maps library exceptions onto exit codes; `body` does the work.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ValidationError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const IngestError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_run(const Overrides& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Session session(effective_config(o));
        const RunResult result = session.run();
        out << summary(result).dump(2) << '\n';
        return result.state == SessionState::Diverged ? kDiverged : kOk;
    });
}

int cmd_plot(const std::string& log_path, const std::string& out_path, bool log_scale, std::ostream& err) {
    return guarded(err, [&] {
        const RunLog log = read_run_log(log_path);
        PlotOptions options;
        options.log_scale = log_scale;
        const std::string svg = render_cloud_svg(log.records, options);
        std::ofstream file(out_path, std::ios::binary);
        if (!file) throw IoError("cannot write " + out_path);
        file << svg;
        if (!file.flush()) throw IoError("cannot write " + out_path);
        return kOk;
    });
}

int cmd_serve(const Overrides& o, const std::string& host, int port, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Session session(effective_config(o));
        MonitorService service(session);
        const int bound = service.bind(host, port);
        out << json{{"listening", host}, {"port", bound}}.dump() << std::endl;

        g_signalled = false;
        auto previous_int = std::signal(SIGINT, on_signal);
        auto previous_term = std::signal(SIGTERM, on_signal);

        std::thread server([&] { service.listen(); });
        service.wait_until_ready();

        std::optional<RunResult> result;
        std::exception_ptr failure;
        std::atomic<bool> done{false};
        std::thread trainer([&] {
            try {
                result = session.run();
            } catch (...) {
                failure = std::current_exception();
            }
            done = true;
        });

        // A Stop command ends training (state Stopped) or, once training is
        // over, asks the service to shut down; either way the process exits.
        for (;;) {
            if (g_signalled || service.shutdown_requested()) break;
            if (done && session.status().state == SessionState::Stopped) break;
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        if (!done) {
            try {
                session.submit(ControlCommand{ControlKind::Stop});
            } catch (const SessionClosed&) {
            }
        }
        trainer.join();
        service.stop();
        server.join();
        std::signal(SIGINT, previous_int);
        std::signal(SIGTERM, previous_term);

        if (failure) std::rethrow_exception(failure);
        if (result) out << summary(*result).dump() << std::endl;
        return result && result->state == SessionState::Diverged ? kDiverged : kOk;
    });
}

} // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Train networks against YES lower bounds and watch the training cloud."};
    app.require_subcommand(1);

    Overrides run_overrides;
    CLI::App* run = app.add_subcommand("run", "run one training session headless");
    add_run_options(*run, run_overrides);

    std::string log_path;
    std::string svg_path;
    bool log_scale = false;
    CLI::App* plot = app.add_subcommand("plot", "render the cloud plot of a run log as SVG");
    plot->add_option("--log", log_path, "run log (JSONL)")->required();
    plot->add_option("--out", svg_path, "output SVG path")->required();
    plot->add_flag("--log-scale", log_scale, "logarithmic loss axis");

    Overrides serve_overrides;
    std::string host = "127.0.0.1";
    int port = 8080;
    CLI::App* serve = app.add_subcommand("serve", "run a session behind the HTTP monitor");
    add_run_options(*serve, serve_overrides);
    serve->add_option("--port", port, "TCP port (0 picks a free one)");
    serve->add_option("--host", host, "bind address");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kConfigError;
    }

    if (*run) return cmd_run(run_overrides, out, err);
    if (*plot) return cmd_plot(log_path, svg_path, log_scale, err);
    return cmd_serve(serve_overrides, host, port, out, err);
}

} // namespace yescert::cli
