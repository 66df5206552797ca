#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include <fxcast/fxcast.hpp>

using namespace fxcast;

namespace {

ModelSpec spec_for(Architecture arch, std::int64_t hidden, std::int64_t layers) {
    ModelSpec s = ModelSpec::desk_profile(arch);
    s.hidden_size = static_cast<std::size_t>(hidden);
    s.hidden_layers = static_cast<std::size_t>(layers);
    s.seed = 1;
    return s;
}

std::vector<double> window() {
    std::vector<double> w(10);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 + 0.3 * std::sin(0.7 * static_cast<double>(i));
    return w;
}

void BM_Forward(benchmark::State& state, Architecture arch) {
    const Model m = init_params(spec_for(arch, state.range(0), state.range(1)));
    const auto w = window();
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(m.params, w));
    }
}

void BM_Gradients(benchmark::State& state, Architecture arch) {
    const Model m = init_params(spec_for(arch, state.range(0), state.range(1)));
    const auto w = window();
    for (auto _ : state) {
        auto g = compute_gradients(m.params, w, 0.4);
        benchmark::DoNotOptimize(g);
    }
}

void BM_MlpStep(benchmark::State& state) {
    MlpParams p = std::get<MlpParams>(init_params(spec_for(Architecture::Bp, state.range(0), state.range(1))).params);
    const auto w = window();
    const Vector x(w);
    for (auto _ : state) {
        p = mlp_backprop_step(std::move(p), x, 0.4, 0.01);
        benchmark::DoNotOptimize(p);
    }
}

void BM_TrainEpoch(benchmark::State& state, Architecture arch) {
    std::vector<double> series(1000);
    for (std::size_t i = 0; i < series.size(); ++i) {
        series[i] = 0.5 + 0.4 * std::sin(2.0 * 3.141592653589793 * static_cast<double>(i) / 50.0);
    }
    const auto data = make_windows(series, 10);
    const ModelSpec spec = spec_for(arch, 16, 2);
    TrainConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) {
        auto r = train(spec, cfg, data);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Forward, lstm, Architecture::Lstm)->Args({16, 2})->Args({128, 7});
BENCHMARK_CAPTURE(BM_Forward, rnn, Architecture::Rnn)->Args({16, 2})->Args({128, 7});
BENCHMARK_CAPTURE(BM_Forward, bp, Architecture::Bp)->Args({16, 2})->Args({128, 7});
BENCHMARK_CAPTURE(BM_Gradients, lstm, Architecture::Lstm)->Args({16, 2})->Args({128, 7});
BENCHMARK_CAPTURE(BM_Gradients, rnn, Architecture::Rnn)->Args({16, 2})->Args({128, 7});
BENCHMARK_CAPTURE(BM_Gradients, bp, Architecture::Bp)->Args({16, 2})->Args({128, 7});
BENCHMARK(BM_MlpStep)->Args({16, 2})->Args({128, 7});
BENCHMARK_CAPTURE(BM_TrainEpoch, lstm, Architecture::Lstm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainEpoch, rnn, Architecture::Rnn)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
