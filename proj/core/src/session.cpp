#include "yescert/session.hpp"

#include "yescert/mnist.hpp"
#include "yescert/optim.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace yescert {

using nlohmann::json;

std::string_view to_string(SessionState s) noexcept {
    switch (s) {
    case SessionState::Idle: return "idle";
    case SessionState::Running: return "running";
    case SessionState::Paused: return "paused";
    case SessionState::Stopped: return "stopped";
    case SessionState::Finished: return "finished";
    case SessionState::Diverged: return "diverged";
    }
    return "idle";
}

json to_json(const SessionStatus& s) {
    return json{
        {"state", to_string(s.state)},
        {"completed_epochs", s.completed_epochs},
        {"next_apply_epoch", s.next_apply_epoch},
        {"lr", s.lr},
        {"region", s.region ? json(to_string(*s.region)) : json(nullptr)},
        {"guidance_active", s.guidance_active},
    };
}

std::optional<EpochRecord> Subscription::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    EpochRecord r = std::move(queue_.front());
    queue_.pop_front();
    return r;
}

bool Subscription::closed() const {
    std::lock_guard lock(mu_);
    return closed_;
}

bool Subscription::overflowed() const {
    std::lock_guard lock(mu_);
    return overflowed_;
}

void Subscription::push(const EpochRecord& r) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        if (queue_.size() >= capacity_) {
            overflowed_ = true;
            closed_ = true;
            queue_.clear();
        } else {
            queue_.push_back(r);
        }
    }
    cv_.notify_all();
}

void Subscription::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

namespace {

std::size_t resolve_degree(const SessionConfig& c, std::size_t depth) {
    if (depth < 2) throw ConfigError("network.layers", "bounds need at least two layers");
    const std::size_t max = depth - 1;
    if (c.bounds.max_degree == 0) return max;
    if (c.bounds.max_degree > max) {
        throw ConfigError("bounds.max_degree", "must be <= K - 1 = " + std::to_string(max));
    }
    return c.bounds.max_degree;
}

BoundEngine make_engine(const SessionConfig& c, const Dataset& ds) {
    const auto layers = resolved_layers(c, ds.x.rows(), ds.y.rows());
    return BoundEngine(ds.x, ds.y, BoundOptions{resolved_activations(c, layers.size() - 1), resolved_bias(c), c.bounds.rcond});
}

Dataset checked_dataset(const SessionConfig& c) {
    validate(c);
    Dataset ds = build_dataset(c.task);
    if (c.batch_size > ds.samples()) {
        throw ConfigError("batch_size", "batch size " + std::to_string(c.batch_size) + " exceeds the " +
                                            std::to_string(ds.samples()) + " available samples");
    }
    return ds;
}

bool is_classification(TaskKind k) { return k == TaskKind::Mnist || k == TaskKind::SyntheticDigits; }

} // namespace

Session::Session(SessionConfig config)
    : config_(std::move(config)),
      dataset_(checked_dataset(config_)),
      initial_([&] {
          const auto layers = resolved_layers(config_, dataset_.x.rows(), dataset_.y.rows());
          const auto acts = resolved_activations(config_, layers.size() - 1);
          return init_params(layers, resolved_bias(config_), acts, config_.seed);
      }()),
      engine_(make_engine(config_, dataset_)),
      max_degree_(resolve_degree(config_, initial_.depth())),
      schedule_{config_.optimizer.lr, config_.optimizer.decay_factor, config_.optimizer.decay_period},
      guidance_on_(config_.guidance.enabled) {
    status_.lr = schedule_.at(0);
    status_.guidance_active = guidance_on_;
}

std::size_t Session::submit(const ControlCommand& command) {
    std::lock_guard lock(mu_);
    if (is_terminal(status_.state)) {
        throw SessionClosed("session is " + std::string(to_string(status_.state)) + "; command rejected");
    }
    commands_.push_back(command);
    cv_.notify_all();
    return status_.next_apply_epoch;
}

std::vector<EpochRecord> Session::records_from(std::size_t from) const {
    std::lock_guard lock(mu_);
    std::vector<EpochRecord> out;
    for (const auto& r : records_)
        if (r.epoch >= from) out.push_back(r);
    return out;
}

SessionStatus Session::status() const {
    std::lock_guard lock(mu_);
    return status_;
}

std::shared_ptr<Subscription> Session::subscribe(std::size_t capacity) {
    auto sub = std::make_shared<Subscription>(capacity);
    std::lock_guard lock(mu_);
    if (is_terminal(status_.state)) sub->close();
    else subscribers_.push_back(sub);
    return sub;
}

void Session::apply(const ControlCommand& c, std::size_t epoch, std::vector<Event>& applied) {
    switch (c.kind) {
    case ControlKind::Pause: paused_ = true; break;
    case ControlKind::Resume: paused_ = false; break;
    case ControlKind::Stop: stop_requested_ = true; break;
    case ControlKind::SetLearningRate:
        schedule_.eta0 = c.learning_rate;
        schedule_origin_ = epoch;
        break;
    case ControlKind::ToggleGuidance: guidance_on_ = c.guidance; break;
    }
    applied.push_back(Event{EventKind::ControlApplied, std::nullopt, c.describe()});
}

// Drains the command queue before `epoch` runs, honouring pause. Returns
// false when the run should end instead.
bool Session::boundary(std::size_t epoch, std::vector<Event>& applied) {
    std::unique_lock lock(mu_);
    for (;;) {
        while (!commands_.empty()) {
            ControlCommand c = commands_.front();
            commands_.pop_front();
            apply(c, epoch, applied);
        }
        if (stop_requested_) return false;
        if (!paused_) break;
        status_.state = SessionState::Paused;
        status_.next_apply_epoch = epoch;
        cv_.wait(lock, [&] { return !commands_.empty(); });
    }
    status_.state = SessionState::Running;
    status_.next_apply_epoch = epoch + 1;
    status_.guidance_active = guidance_on_;
    return true;
}

void Session::publish(const EpochRecord& r) {
    std::vector<std::shared_ptr<Subscription>> live;
    {
        std::lock_guard lock(mu_);
        records_.push_back(r);
        status_.completed_epochs = r.epoch;
        status_.lr = r.lr;
        status_.region = r.region;
        std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
        for (const auto& w : subscribers_)
            if (auto s = w.lock()) live.push_back(std::move(s));
    }
    for (const auto& s : live) s->push(r);
}

void Session::finish(SessionState final_state) {
    std::vector<std::shared_ptr<Subscription>> live;
    {
        std::lock_guard lock(mu_);
        status_.state = final_state;
        commands_.clear();
        for (const auto& w : subscribers_)
            if (auto s = w.lock()) live.push_back(std::move(s));
        subscribers_.clear();
    }
    for (const auto& s : live) s->close();
}

RunResult Session::run() {
    {
        std::lock_guard lock(mu_);
        if (status_.state != SessionState::Idle) throw Error("session has already run");
        status_.state = SessionState::Running;
    }
    const auto started = std::chrono::steady_clock::now();
    RunLogWriter writer(config_.output.jsonl, config_.output.csv, config_to_json(config_));

    MlpParams params = initial_;
    OptimizerState opt = make_optimizer(config_.optimizer.kind, params, config_.optimizer.adam);
    // Shuffling gets its own stream so initialization and batching stay independent.
    std::mt19937_64 shuffle_rng(config_.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<EpochRecord> history;
    std::optional<CloudRegion> last_region;
    std::optional<double> last_distance;
    bool plateau_active = false;
    SessionState final_state = SessionState::Finished;

    for (std::size_t epoch = 1; epoch <= config_.max_epochs; ++epoch) {
        std::vector<Event> applied;
        if (!boundary(epoch, applied)) {
            final_state = SessionState::Stopped;
            break;
        }

        double lr = schedule_.at(epoch - schedule_origin_);
        if (config_.optimizer.freeze_after_epoch && epoch > *config_.optimizer.freeze_after_epoch) lr = 0.0;
        const bool guided = guidance_on_ && last_distance.has_value();
        if (guided) lr = guidance_hook(*last_distance, lr, config_.guidance.rule);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.guidance_active = guidance_on_;
        rec.events = std::move(applied);

        const MlpParams before = params;
        bool diverged = false;
        try {
            train_epoch(params, opt, dataset_.x, dataset_.y, config_.batch_size, lr, shuffle_rng);
        } catch (const TrainingFault& e) {
            diverged = true;
            rec.events.push_back(Event{EventKind::Diverged, std::nullopt, e.what()});
        }

        ForwardResult fw{dataset_.x, {}};
        if (!diverged) {
            fw = forward(params, dataset_.x);
            rec.train_loss = loss_mse(fw.output, dataset_.y);
            if (!std::isfinite(rec.train_loss)) {
                diverged = true;
                rec.events.push_back(Event{EventKind::Diverged, std::nullopt, "non-finite training loss"});
            }
        }

        if (diverged) {
            rec.train_loss = std::nan("");
            rec.weight_change = std::nan("");
            rec.region = CloudRegion::Red;
            rec.region_stale = false;
            rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
            writer.append(rec);
            publish(rec);
            history.push_back(std::move(rec));
            final_state = SessionState::Diverged;
            break;
        }

        rec.weight_change = weight_change_norm(before, params);
        if (is_classification(config_.task.kind)) rec.success_rate = mnist::success_rate(fw.output, dataset_.y);

        const bool cadence_epoch = epoch == 1 || epoch % config_.bounds.cadence == 0;
        if (cadence_epoch) {
            YesBoundSet bounds = engine_.bound_set(fw.layer_outputs, max_degree_, config_.bounds.monotone);
            if (bound_observer_) bound_observer_(bounds);
            rec.region = classify_region(rec.train_loss, bounds);
            rec.region_stale = false;
            last_distance = guidance_distance(rec.train_loss, bounds);
            rec.bounds = std::move(bounds);
        } else {
            rec.region = last_region.value_or(CloudRegion::Red);
            rec.region_stale = true;
        }
        if (!last_region || *last_region != rec.region) {
            rec.events.push_back(Event{EventKind::EnteredRegion, rec.region, {}});
        }
        last_region = rec.region;

        history.push_back(rec);
        if (auto plateau = plateau_detector(history, config_.plateau.rel_threshold, config_.plateau.window)) {
            if (!plateau_active) {
                rec.events.push_back(Event{EventKind::PlateauDetected, plateau->region, {}});
                plateau_active = true;
            }
        } else {
            plateau_active = false;
        }

        bool stop_now = false;
        if (config_.stop.enabled && history.size() >= config_.stop.window) {
            const std::span<const EpochRecord> all(history);
            if (stop_rule(all.subspan(all.size() - config_.stop.window), config_.stop)) {
                rec.events.push_back(Event{EventKind::Stopped, rec.region, "stop rule: green with settled weights"});
                stop_now = true;
            }
        }

        rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
        history.back() = rec;
        writer.append(rec);
        publish(rec);
        if (stop_now) {
            final_state = SessionState::Stopped;
            break;
        }
    }

    if (!config_.output.weights.empty()) {
        std::ofstream out(config_.output.weights);
        if (!out) throw IoError("cannot write weights snapshot " + config_.output.weights);
        out << params_to_json(params).dump() << '\n';
    }
    finish(final_state);
    return RunResult{std::move(history), std::move(params), final_state};
}

json params_to_json(const MlpParams& p) {
    json layers = json::array();
    for (const auto& l : p.layers) {
        json rows = json::array();
        for (std::size_t r = 0; r < l.weight.rows(); ++r) {
            const auto row = l.weight.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        layers.push_back(json{{"weight", std::move(rows)},
                              {"bias", l.bias ? json(*l.bias) : json(nullptr)},
                              {"activation", to_string(l.activation)}});
    }
    return json{{"layers", std::move(layers)}};
}

} // namespace yescert
