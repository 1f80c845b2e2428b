#include "yescert/service.hpp"

#include <httplib.h>

#include <charconv>

namespace yescert {

using nlohmann::json;

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

} // namespace

MonitorService::MonitorService(Session& session) : MonitorService(session, Options{}) {}

MonitorService::MonitorService(Session& session, Options options)
    : session_(session), options_(options), server_(std::make_unique<httplib::Server>()) {
    // httplib's defaults add SO_REUSEPORT, which would let a second server
    // share a port that is already in use.
    server_->set_socket_options([](auto sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    routes();
}

MonitorService::~MonitorService() { stop(); }

void MonitorService::routes() {
    server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

    server_->Get("/session", [this](const httplib::Request&, httplib::Response& res) {
        reply_json(res, 200, json{{"config", config_to_json(session_.config())}, {"status", to_json(session_.status())}});
    });

    server_->Get("/records", [this](const httplib::Request& req, httplib::Response& res) {
        std::size_t from = 0;
        if (req.has_param("from")) {
            const std::string s = req.get_param_value("from");
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), from);
            if (ec != std::errc{} || ptr != s.data() + s.size()) {
                reply_json(res, 400, json{{"error", "from: expected a non-negative integer"}});
                return;
            }
        }
        json arr = json::array();
        for (const auto& r : session_.records_from(from)) arr.push_back(to_json(r));
        reply_json(res, 200, arr);
    });

    server_->Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
        auto sub = session_.subscribe(options_.stream_capacity);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, sub](std::size_t, httplib::DataSink& sink) {
            if (stopping_) {
                sink.done();
                return true;
            }
            if (auto rec = sub->next(options_.keepalive)) {
                const std::string frame = "data: " + to_json(*rec).dump() + "\n\n";
                return sink.write(frame.data(), frame.size());
            }
            if (sub->closed()) {
                json end = to_json(session_.status());
                end["overflowed"] = sub->overflowed();
                const std::string frame = "event: end\ndata: " + end.dump() + "\n\n";
                sink.write(frame.data(), frame.size());
                sink.done();
                return true;
            }
            static constexpr char keepalive[] = ": keepalive\n\n";
            return sink.write(keepalive, sizeof keepalive - 1);
        });
    });

    server_->Post("/control", [this](const httplib::Request& req, httplib::Response& res) {
        ControlCommand cmd;
        try {
            cmd = control_from_json(json::parse(req.body));
        } catch (const json::parse_error& e) {
            reply_json(res, 400, json{{"error", std::string("body: invalid JSON: ") + e.what()}});
            return;
        } catch (const ValidationError& e) {
            reply_json(res, 400, json{{"error", e.what()}});
            return;
        }
        try {
            const std::size_t epoch = session_.submit(cmd);
            reply_json(res, 200, json{{"accepted", true}, {"applies_at_epoch", epoch}, {"command", to_json(cmd)}});
        } catch (const SessionClosed& e) {
            const SessionStatus st = session_.status();
            if (cmd.kind == ControlKind::Stop && st.state == SessionState::Finished) {
                reply_json(res, 200, json{{"accepted", true}, {"applies_at_epoch", nullptr}, {"shutdown", true}});
                shutdown_requested_ = true;
                if (on_shutdown_) on_shutdown_();
                return;
            }
            reply_json(res, 409, json{{"error", e.what()}, {"state", to_string(st.state)}});
        }
    });
}

int MonitorService::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound <= 0) throw Error("cannot bind " + host + " to any port");
        return bound;
    }
    if (!server_->bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
    return port;
}

void MonitorService::listen() { server_->listen_after_bind(); }

void MonitorService::stop() {
    stopping_ = true;
    if (server_) server_->stop();
}

void MonitorService::wait_until_ready() const { server_->wait_until_ready(); }

} // namespace yescert
