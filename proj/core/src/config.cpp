#include "yescert/config.hpp"

#include "yescert/error.hpp"
#include "yescert/image.hpp"
#include "yescert/mnist.hpp"

#include <fstream>
#include <set>

namespace yescert {

using nlohmann::json;

std::string_view to_string(TaskKind k) noexcept {
    switch (k) {
    case TaskKind::PhaseRetrieval: return "phase_retrieval";
    case TaskKind::Denoising: return "denoising";
    case TaskKind::QuadraticImage: return "quadratic_image";
    case TaskKind::Mnist: return "mnist";
    case TaskKind::SyntheticDigits: return "synthetic_digits";
    }
    return "phase_retrieval";
}

TaskKind task_from_string(std::string_view s) {
    if (s == "phase_retrieval") return TaskKind::PhaseRetrieval;
    if (s == "denoising") return TaskKind::Denoising;
    if (s == "quadratic_image") return TaskKind::QuadraticImage;
    if (s == "mnist") return TaskKind::Mnist;
    if (s == "synthetic_digits") return TaskKind::SyntheticDigits;
    throw ConfigError("task.kind", "unknown task '" + std::string(s) + "'");
}

namespace {

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown fields.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    // Rejects keys that no get()/find() asked for.
    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        const json* v = find(key);
        if (!v) return;
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v->is_boolean()) throw ConfigError(field(key), "expected a boolean");
                out = v->get<bool>();
            } else if constexpr (std::is_unsigned_v<T>) {
                if (!v->is_number_integer() || v->get<long long>() < 0) throw ConfigError(field(key), "expected a non-negative integer");
                out = v->get<T>();
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v->is_number()) throw ConfigError(field(key), "expected a number");
                out = v->get<T>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v->is_string()) throw ConfigError(field(key), "expected a string");
                out = v->get<std::string>();
            } else {
                out = v->get<T>();
            }
        } catch (const json::exception& e) {
            throw ConfigError(field(key), e.what());
        }
    }

    template <typename T>
    void get(const std::string& key, std::optional<T>& out) {
        if (!find(key)) return;
        T tmp{};
        get(key, tmp);
        out = tmp;
    }

    template <typename Enum, typename Parse>
    void get_enum(const std::string& key, Enum& out, Parse parse) {
        std::string s;
        get(key, s);
        if (!find(key)) return;
        try {
            out = parse(s);
        } catch (const ConfigError& e) {
            throw ConfigError(field(key), e.what());
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void parse_task(const json& j, TaskSpec& t) {
    Reader r(j, "task");
    r.get_enum("kind", t.kind, task_from_string);
    r.get("seed", t.seed);
    r.get_enum("direction", t.direction, direction_from_string);
    r.get("n", t.n);
    r.get("d", t.d);
    r.get("num_signals", t.num_signals);
    r.get("noise_per_signal", t.noise_per_signal);
    r.get("noise_param", t.noise_param);
    r.get_enum("noise_interpretation", t.noise_interpretation, noise_param_from_string);
    r.get("image_path", t.image_path);
    r.get("image_width", t.image_width);
    r.get("image_height", t.image_height);
    r.get("patch_size", t.patch_size);
    r.get("noise_std", t.noise_std);
    r.get("sensing", t.sensing);
    r.get("blur_sigma", t.blur_sigma);
    r.get("sensing_seed", t.sensing_seed);
    r.get("mnist_images", t.mnist_images);
    r.get("mnist_labels", t.mnist_labels);
    r.get("count", t.count);
    r.get("jitter", t.jitter);
    r.finish();
}

void parse_network(const json& j, NetworkSpec& n) {
    Reader r(j, "network");
    if (const json* layers = r.find("layers")) {
        if (!layers->is_array()) throw ConfigError("network.layers", "expected an array of positive integers");
        n.layers.clear();
        for (std::size_t i = 0; i < layers->size(); ++i) {
            const json& v = (*layers)[i];
            if (!v.is_number_integer() || v.get<long long>() <= 0) {
                throw ConfigError("network.layers[" + std::to_string(i) + "]", "expected a positive integer");
            }
            n.layers.push_back(v.get<std::size_t>());
        }
    }
    r.get_enum("hidden_activation", n.hidden_activation, activation_from_string);
    r.get_enum("output_activation", n.output_activation, activation_from_string);
    r.get("bias", n.bias);
    r.finish();
}

void parse_optimizer(const json& j, OptimizerSpec& o) {
    Reader r(j, "optimizer");
    r.get_enum("kind", o.kind, optimizer_from_string);
    r.get("lr", o.lr);
    r.get("decay_factor", o.decay_factor);
    r.get("decay_period", o.decay_period);
    r.get("beta1", o.adam.beta1);
    r.get("beta2", o.adam.beta2);
    r.get("eps", o.adam.eps);
    r.get("freeze_after_epoch", o.freeze_after_epoch);
    r.finish();
}

} // namespace

SessionConfig config_from_json(const json& j) {
    SessionConfig c;
    Reader r(j, "");
    if (const json* v = r.find("task")) parse_task(*v, c.task);
    if (const json* v = r.find("network")) parse_network(*v, c.network);
    if (const json* v = r.find("optimizer")) parse_optimizer(*v, c.optimizer);
    r.get("batch_size", c.batch_size);
    r.get("max_epochs", c.max_epochs);
    r.get("seed", c.seed);
    if (const json* v = r.find("bounds")) {
        Reader b(*v, "bounds");
        b.get("cadence", c.bounds.cadence);
        b.get("max_degree", c.bounds.max_degree);
        b.get("monotone", c.bounds.monotone);
        b.get("rcond", c.bounds.rcond);
        b.finish();
    }
    if (const json* v = r.find("guidance")) {
        Reader g(*v, "guidance");
        g.get("enabled", c.guidance.enabled);
        g.get("gain", c.guidance.rule.gain);
        g.get("scale", c.guidance.rule.scale);
        g.get("cap", c.guidance.rule.cap);
        g.finish();
    }
    if (const json* v = r.find("stop")) {
        Reader s(*v, "stop");
        s.get("enabled", c.stop.enabled);
        s.get("weight_change_threshold", c.stop.weight_change_threshold);
        s.get("window", c.stop.window);
        s.finish();
    }
    if (const json* v = r.find("plateau")) {
        Reader p(*v, "plateau");
        p.get("rel_threshold", c.plateau.rel_threshold);
        p.get("window", c.plateau.window);
        p.finish();
    }
    if (const json* v = r.find("output")) {
        Reader o(*v, "output");
        o.get("jsonl", c.output.jsonl);
        o.get("csv", c.output.csv);
        o.get("weights", c.output.weights);
        o.finish();
    }
    r.finish();
    return c;
}

json config_to_json(const SessionConfig& c) {
    json task = {
        {"kind", to_string(c.task.kind)},
        {"seed", c.task.seed},
        {"direction", to_string(c.task.direction)},
        {"n", c.task.n},
        {"d", c.task.d},
        {"num_signals", c.task.num_signals},
        {"noise_per_signal", c.task.noise_per_signal},
        {"noise_param", c.task.noise_param},
        {"noise_interpretation", to_string(c.task.noise_interpretation)},
        {"image_path", c.task.image_path},
        {"image_width", c.task.image_width},
        {"image_height", c.task.image_height},
        {"patch_size", c.task.patch_size},
        {"noise_std", c.task.noise_std},
        {"sensing", c.task.sensing},
        {"blur_sigma", c.task.blur_sigma},
        {"sensing_seed", c.task.sensing_seed},
        {"mnist_images", c.task.mnist_images},
        {"mnist_labels", c.task.mnist_labels},
        {"count", c.task.count},
        {"jitter", c.task.jitter},
    };
    json network = {
        {"layers", c.network.layers},
        {"hidden_activation", to_string(c.network.hidden_activation)},
        {"output_activation", to_string(c.network.output_activation)},
        {"bias", c.network.bias ? json(*c.network.bias) : json(nullptr)},
    };
    json optimizer = {
        {"kind", to_string(c.optimizer.kind)},
        {"lr", c.optimizer.lr},
        {"decay_factor", c.optimizer.decay_factor},
        {"decay_period", c.optimizer.decay_period},
        {"beta1", c.optimizer.adam.beta1},
        {"beta2", c.optimizer.adam.beta2},
        {"eps", c.optimizer.adam.eps},
        {"freeze_after_epoch", c.optimizer.freeze_after_epoch ? json(*c.optimizer.freeze_after_epoch) : json(nullptr)},
    };
    return json{
        {"task", task},
        {"network", network},
        {"optimizer", optimizer},
        {"batch_size", c.batch_size},
        {"max_epochs", c.max_epochs},
        {"seed", c.seed},
        {"bounds",
         {{"cadence", c.bounds.cadence},
          {"max_degree", c.bounds.max_degree},
          {"monotone", c.bounds.monotone},
          {"rcond", c.bounds.rcond ? json(*c.bounds.rcond) : json(nullptr)}}},
        {"guidance",
         {{"enabled", c.guidance.enabled},
          {"gain", c.guidance.rule.gain},
          {"scale", c.guidance.rule.scale},
          {"cap", c.guidance.rule.cap}}},
        {"stop",
         {{"enabled", c.stop.enabled},
          {"weight_change_threshold", c.stop.weight_change_threshold},
          {"window", c.stop.window}}},
        {"plateau", {{"rel_threshold", c.plateau.rel_threshold}, {"window", c.plateau.window}}},
        {"output", {{"jsonl", c.output.jsonl}, {"csv", c.output.csv}, {"weights", c.output.weights}}},
    };
}

SessionConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void validate(const SessionConfig& c) {
    if (c.batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
    if (c.bounds.cadence == 0) throw ConfigError("bounds.cadence", "must be >= 1");
    if (c.bounds.rcond && !(*c.bounds.rcond > 0.0)) throw ConfigError("bounds.rcond", "must be > 0");
    if (c.network.layers.size() == 1) throw ConfigError("network.layers", "need at least an input and an output size");
    validate(LrSchedule{c.optimizer.lr, c.optimizer.decay_factor, c.optimizer.decay_period});
    if (!(c.optimizer.adam.beta1 >= 0.0 && c.optimizer.adam.beta1 < 1.0)) throw ConfigError("optimizer.beta1", "must be in [0, 1)");
    if (!(c.optimizer.adam.beta2 >= 0.0 && c.optimizer.adam.beta2 < 1.0)) throw ConfigError("optimizer.beta2", "must be in [0, 1)");
    if (!(c.optimizer.adam.eps > 0.0)) throw ConfigError("optimizer.eps", "must be > 0");
    if (!(c.guidance.rule.scale > 0.0)) throw ConfigError("guidance.scale", "must be > 0");
    if (!(c.guidance.rule.gain >= 0.0)) throw ConfigError("guidance.gain", "must be >= 0");
    if (!(c.guidance.rule.cap >= 0.0)) throw ConfigError("guidance.cap", "must be >= 0");
    if (c.stop.window == 0) throw ConfigError("stop.window", "must be >= 1");
    if (c.plateau.window < 2) throw ConfigError("plateau.window", "must be >= 2");
    if (!(c.plateau.rel_threshold > 0.0)) throw ConfigError("plateau.rel_threshold", "must be > 0");
    if (c.task.sensing != "gaussian" && c.task.sensing != "blur") {
        throw ConfigError("task.sensing", "expected 'gaussian' or 'blur'");
    }
    if ((c.task.kind == TaskKind::Mnist) && (c.task.mnist_images.empty() || c.task.mnist_labels.empty())) {
        throw ConfigError("task.mnist_images", "mnist task needs mnist_images and mnist_labels paths");
    }
}

std::vector<std::size_t> resolved_layers(const SessionConfig& c, std::size_t in_dim, std::size_t out_dim) {
    if (c.network.layers.empty()) return {in_dim, in_dim, in_dim, in_dim, in_dim, out_dim};
    const auto& l = c.network.layers;
    if (l.front() != in_dim) {
        throw ConfigError("network.layers[0]", "input size " + std::to_string(l.front()) + " does not match the task's " +
                                                   std::to_string(in_dim));
    }
    if (l.back() != out_dim) {
        throw ConfigError("network.layers[" + std::to_string(l.size() - 1) + "]",
                          "output size " + std::to_string(l.back()) + " does not match the task's " + std::to_string(out_dim));
    }
    return l;
}

bool resolved_bias(const SessionConfig& c) {
    if (c.network.bias) return *c.network.bias;
    return c.task.kind != TaskKind::PhaseRetrieval;
}

std::vector<Activation> resolved_activations(const SessionConfig& c, std::size_t layer_count) {
    std::vector<Activation> acts(layer_count, c.network.hidden_activation);
    if (layer_count > 0) acts.back() = c.network.output_activation;
    return acts;
}

Dataset build_dataset(const TaskSpec& t) {
    switch (t.kind) {
    case TaskKind::PhaseRetrieval: return gen_phase_retrieval(t.n, t.d, t.seed, t.direction);
    case TaskKind::Denoising: {
        if (t.num_signals * t.noise_per_signal == 0) throw ConfigError("task.num_signals", "must be positive");
        return gen_denoising(t.n, t.num_signals, t.noise_per_signal, t.noise_param, t.seed, t.noise_interpretation);
    }
    case TaskKind::QuadraticImage: {
        ImagePatchPlan plan;
        plan.patch_size = t.patch_size;
        plan.sensing_seed = t.sensing_seed;
        plan.noise_std = t.noise_std;
        plan.sensing = t.sensing == "blur" ? SensingKind::Blur : SensingKind::Gaussian;
        plan.blur_sigma = t.blur_sigma;
        plan.direction = t.direction;
        GrayImage img = t.image_path.empty() ? synthetic_image(t.image_width, t.image_height, t.seed)
                                             : read_pgm(t.image_path);
        plan.width = img.width;
        plan.height = img.height;
        return gen_quadratic_image(img, plan, t.seed);
    }
    case TaskKind::Mnist: return mnist::load(t.mnist_images, t.mnist_labels, t.count);
    case TaskKind::SyntheticDigits: {
        const auto syn = mnist::synthetic_digits(t.count, t.seed, t.jitter);
        Dataset ds = mnist::to_dataset(syn.images, syn.labels, t.count);
        ds.meta.task = "synthetic_digits";
        ds.meta.seed = t.seed;
        return ds;
    }
    }
    throw ConfigError("task.kind", "unsupported task");
}

} // namespace yescert
