#pragma once

#include "yescert/bounds.hpp"
#include "yescert/config.hpp"
#include "yescert/error.hpp"
#include "yescert/mlp.hpp"
#include "yescert/monitor.hpp"
#include "yescert/record.hpp"
#include "yescert/tasks.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace yescert {

enum class SessionState { Idle, Running, Paused, Stopped, Finished, Diverged };

std::string_view to_string(SessionState s) noexcept;

inline bool is_terminal(SessionState s) noexcept {
    return s == SessionState::Stopped || s == SessionState::Finished || s == SessionState::Diverged;
}

// Raised by Session::submit once the run can no longer take commands.
class SessionClosed : public Error {
public:
    using Error::Error;
};

struct SessionStatus {
    SessionState state = SessionState::Idle;
    std::size_t completed_epochs = 0;
    std::size_t next_apply_epoch = 1;
    double lr = 0.0;
    std::optional<CloudRegion> region;
    bool guidance_active = false;
};

nlohmann::json to_json(const SessionStatus& s);

// Bounded per-consumer queue of published records. When a consumer falls
// `capacity` records behind it is dropped (closed with overflowed() set)
// rather than stalling the training loop.
class Subscription {
public:
    explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

    // Waits up to `timeout`; nullopt on timeout or once closed and drained.
    std::optional<EpochRecord> next(std::chrono::milliseconds timeout);
    bool closed() const;
    bool overflowed() const;

private:
    friend class Session;
    void push(const EpochRecord& r);
    void close();

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<EpochRecord> queue_;
    std::size_t capacity_;
    bool closed_ = false;
    bool overflowed_ = false;
};

struct RunResult {
    std::vector<EpochRecord> records;
    MlpParams params;
    SessionState state = SessionState::Finished;
};

// One training run: the training loop is the single writer; every public
// method other than run() is safe to call from other threads.
class Session {
public:
    // Builds the dataset, the initial parameters and the bound engine.
    explicit Session(SessionConfig config);

    // Blocks until max_epochs, the stop rule, a Stop command or divergence.
    RunResult run();

    // Queues a command for the next epoch boundary and returns the epoch it
    // applies to. Throws SessionClosed once the run is over.
    std::size_t submit(const ControlCommand& command);

    // Records with epoch >= from, in order.
    std::vector<EpochRecord> records_from(std::size_t from) const;
    SessionStatus status() const;
    std::shared_ptr<Subscription> subscribe(std::size_t capacity = 1024);

    const SessionConfig& config() const noexcept { return config_; }
    const Dataset& dataset() const noexcept { return dataset_; }
    const MlpParams& initial_params() const noexcept { return initial_; }
    const BoundEngine& engine() const noexcept { return engine_; }
    std::size_t max_degree() const noexcept { return max_degree_; }

    // Test hook: sees (and may rewrite) every computed bound set before it is
    // classified and recorded.
    void set_bound_observer(std::function<void(YesBoundSet&)> observer) { bound_observer_ = std::move(observer); }

private:
    bool boundary(std::size_t epoch, std::vector<Event>& applied);
    void apply(const ControlCommand& c, std::size_t epoch, std::vector<Event>& applied);
    void publish(const EpochRecord& r);
    void finish(SessionState final_state);

    SessionConfig config_;
    Dataset dataset_;
    MlpParams initial_;
    BoundEngine engine_;
    std::size_t max_degree_;
    std::function<void(YesBoundSet&)> bound_observer_;

    // Training-thread state.
    LrSchedule schedule_;
    std::size_t schedule_origin_ = 1;
    bool guidance_on_ = false;
    bool paused_ = false;
    bool stop_requested_ = false;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<ControlCommand> commands_;
    std::vector<EpochRecord> records_;
    std::vector<std::weak_ptr<Subscription>> subscribers_;
    SessionStatus status_;
};

// Weights snapshot as JSON: {"layers": [{"weight": [[...]], "bias": [...]|null, "activation": ...}]}.
nlohmann::json params_to_json(const MlpParams& p);

} // namespace yescert
