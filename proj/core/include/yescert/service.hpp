#pragma once

#include "yescert/session.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace yescert {

// HTTP/JSON front end over a Session:
//   GET  /healthz          -> 200 "ok"
//   GET  /session          -> {"config": ..., "status": ...}
//   GET  /records?from=E   -> JSON array of records with epoch >= E (default 0)
//   GET  /stream           -> server-sent events, one "data: <record>\n\n" per new
//                             epoch; a final "event: end" carries the status
//   POST /control          -> {"accepted": true, "applies_at_epoch": E}
//                             400 on malformed commands, 409 once stopped
class MonitorService {
public:
    struct Options {
        std::size_t stream_capacity = 1024;
        std::chrono::milliseconds keepalive{1000};
    };

    explicit MonitorService(Session& session);
    MonitorService(Session& session, Options options);
    ~MonitorService();

    MonitorService(const MonitorService&) = delete;
    MonitorService& operator=(const MonitorService&) = delete;

    // Binds the listening socket; port 0 picks a free port. Returns the bound
    // port. Throws Error when the port is unavailable.
    int bind(const std::string& host, int port);
    // Serves until stop(). Call after bind().
    void listen();
    void stop();
    void wait_until_ready() const;

    // Set when a Stop command arrives for a session that has already ended;
    // the owner decides when to shut the server down.
    bool shutdown_requested() const noexcept { return shutdown_requested_; }
    void on_shutdown_request(std::function<void()> callback) { on_shutdown_ = std::move(callback); }

private:
    void routes();

    Session& session_;
    Options options_;
    std::unique_ptr<httplib::Server> server_;
    std::atomic<bool> shutdown_requested_{false};
    std::atomic<bool> stopping_{false};
    std::function<void()> on_shutdown_;
};

} // namespace yescert
