#include "yescert/optim.hpp"

#include "yescert/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace yescert {

std::string_view to_string(OptimizerKind k) noexcept { return k == OptimizerKind::SGD ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(std::string_view name) {
    if (name == "sgd" || name == "SGD") return OptimizerKind::SGD;
    if (name == "adam" || name == "Adam") return OptimizerKind::Adam;
    throw ConfigError("optimizer.kind", "unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

namespace {

MlpParams zeros_like(const MlpParams& like) {
    MlpParams z = like;
    for (auto& l : z.layers) {
        l.weight = Matrix::zeros(l.weight.rows(), l.weight.cols());
        if (l.bias) std::fill(l.bias->begin(), l.bias->end(), 0.0);
    }
    return z;
}

// Visits every (param, grad, m, v) quadruple as flat spans.
template <typename F>
void for_each_block(MlpParams& p, const Gradients& g, MlpParams* m, MlpParams* v, F&& f) {
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        f(p.layers[k].weight.data(), std::span<const double>(g.layers[k].weight.data()),
          m ? m->layers[k].weight.data() : std::span<double>{}, v ? v->layers[k].weight.data() : std::span<double>{});
        if (p.layers[k].bias) {
            f(std::span<double>(*p.layers[k].bias), std::span<const double>(*g.layers[k].bias),
              m ? std::span<double>(*m->layers[k].bias) : std::span<double>{},
              v ? std::span<double>(*v->layers[k].bias) : std::span<double>{});
        }
    }
}

void check_shapes(const MlpParams& p, const Gradients& g) {
    if (p.layers.size() != g.layers.size()) throw DimensionError("optimizer_step: gradient layer count differs");
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        const auto& a = p.layers[k];
        const auto& b = g.layers[k];
        if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
            a.bias.has_value() != b.bias.has_value()) {
            throw DimensionError("optimizer_step: gradient shape differs at layer " + std::to_string(k + 1));
        }
    }
}

} // namespace

OptimizerState make_optimizer(OptimizerKind kind, const MlpParams& like, AdamHyper hyper) {
    OptimizerState s;
    s.kind = kind;
    s.hyper = hyper;
    if (kind == OptimizerKind::Adam) {
        s.first = zeros_like(like);
        s.second = zeros_like(like);
    }
    return s;
}

void optimizer_step(MlpParams& params, const Gradients& grads, OptimizerState& state, double lr) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw TrainingFault("optimizer_step: learning rate must be finite and >= 0");
    check_shapes(params, grads);
    for (const auto& l : grads.layers) {
        bool finite = l.weight.all_finite();
        if (l.bias) finite = finite && std::all_of(l.bias->begin(), l.bias->end(), [](double v) { return std::isfinite(v); });
        if (!finite) throw TrainingFault("optimizer_step: non-finite gradient");
    }
    ++state.step;

    if (state.kind == OptimizerKind::SGD) {
        if (lr == 0.0) return;
        for_each_block(params, grads, nullptr, nullptr, [&](std::span<double> p, std::span<const double> g, auto, auto) {
            for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
        });
    } else {
        if (state.first.layers.empty()) {
            state.first = zeros_like(params);
            state.second = zeros_like(params);
        }
        const auto& h = state.hyper;
        const double t = static_cast<double>(state.step);
        const double c1 = 1.0 - std::pow(h.beta1, t);
        const double c2 = 1.0 - std::pow(h.beta2, t);
        for_each_block(params, grads, &state.first, &state.second,
                       [&](std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v) {
                           for (std::size_t i = 0; i < p.size(); ++i) {
                               m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
                               v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
                               if (lr == 0.0) continue;
                               const double mhat = m[i] / c1;
                               const double vhat = v[i] / c2;
                               p[i] -= lr * mhat / (std::sqrt(vhat) + h.eps);
                           }
                       });
    }
    for (const auto& l : params.layers) {
        if (!l.weight.all_finite()) throw TrainingFault("optimizer_step: parameters became non-finite");
    }
}

double LrSchedule::at(std::size_t epochs_since_origin) const {
    const auto periods = static_cast<double>(epochs_since_origin / period_epochs);
    return eta0 * std::pow(decay_factor, periods);
}

void validate(const LrSchedule& s) {
    if (!(s.eta0 > 0.0) || !std::isfinite(s.eta0)) throw ConfigError("optimizer.lr", "must be > 0");
    if (!(s.decay_factor > 0.0 && s.decay_factor <= 1.0)) throw ConfigError("optimizer.decay_factor", "must be in (0, 1]");
    if (s.period_epochs < 1) throw ConfigError("optimizer.decay_period", "must be >= 1");
}

void train_epoch(MlpParams& params, OptimizerState& state, const Matrix& x, const Matrix& y,
                 std::size_t batch_size, double lr, std::mt19937_64& rng) {
    const std::size_t d = x.cols();
    if (batch_size == 0 || batch_size > d) throw ConfigError("batch_size", "must be in [1, d]");
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < d; start += batch_size) {
        const std::size_t count = std::min(batch_size, d - start);
        const std::span<const std::size_t> idx(perm.data() + start, count);
        const Matrix xb = x.gather_cols(idx);
        const Matrix yb = y.gather_cols(idx);
        optimizer_step(params, backward(params, xb, yb), state, lr);
    }
}

} // namespace yescert
