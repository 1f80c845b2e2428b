#include <yescert/bounds.hpp>
#include <yescert/config.hpp>
#include <yescert/matrix.hpp>
#include <yescert/mlp.hpp>
#include <yescert/optim.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace yescert;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Matrix m(rows, cols);
    for (double& v : m.data()) v = n(rng);
    return m;
}

void BM_Pinv(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = gaussian(n, 2 * n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(pinv(a));
    state.SetLabel(a.shape_string());
}
BENCHMARK(BM_Pinv)->Arg(8)->Arg(20)->Arg(64);

void BM_RowSpaceProjection(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    const Matrix a = gaussian(20, d, 2);
    const Matrix t = gaussian(20, d, 3);
    for (auto _ : state) {
        const RowSpaceProjector p(a, default_rcond(a));
        benchmark::DoNotOptimize(p.project(t));
    }
}
BENCHMARK(BM_RowSpaceProjection)->Arg(100)->Arg(1000);

// Full bound set for the default phase-retrieval network (five layers of
// width 20 over 1000 samples).
void BM_BoundSet(benchmark::State& state) {
    SessionConfig c;
    const Dataset ds = build_dataset(c.task);
    const auto layers = resolved_layers(c, ds.x.rows(), ds.y.rows());
    const auto acts = resolved_activations(c, layers.size() - 1);
    const MlpParams p = init_params(layers, false, acts, 1);
    const BoundEngine engine(ds.x, ds.y, {acts, false, {}});
    const ForwardResult fw = forward(p, ds.x);
    const auto degree = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(engine.bound_set(fw.layer_outputs, degree, true));
}
BENCHMARK(BM_BoundSet)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
    SessionConfig c;
    const Dataset ds = build_dataset(c.task);
    const auto layers = resolved_layers(c, ds.x.rows(), ds.y.rows());
    MlpParams p = init_params(layers, false, resolved_activations(c, layers.size() - 1), 1);
    OptimizerState opt = make_optimizer(OptimizerKind::Adam, p, {});
    std::mt19937_64 rng(4);
    for (auto _ : state) train_epoch(p, opt, ds.x, ds.y, 20, 1e-4, rng);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
