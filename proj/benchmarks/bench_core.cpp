#include <benchmark/benchmark.h>

#include <random>

#include "sfec/adam.hpp"
#include "sfec/layers.hpp"
#include "sfec/ops.hpp"
#include "sfec/sinc.hpp"

namespace {

void BM_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    auto a = sfec::Tensor<float>::uniform({n, n}, -1.0f, 1.0f, rng);
    auto b = sfec::Tensor<float>::uniform({n, n}, -1.0f, 1.0f, rng);
    for (auto _ : state) {
        auto c = sfec::matmul(a, b);
        benchmark::DoNotOptimize(c.values().data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * n * n * n);
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(256);

void BM_conv1d(benchmark::State& state) {
    std::mt19937_64 rng(2);
    auto x = sfec::Tensor<float>::uniform({1, 16000}, -1.0f, 1.0f, rng);
    auto k = sfec::Tensor<float>::uniform({80, 1, 251}, -0.1f, 0.1f, rng);
    for (auto _ : state) {
        auto y = sfec::conv1d_valid(x, k, sfec::Tensor<float>{});
        benchmark::DoNotOptimize(y.values().data());
    }
}
BENCHMARK(BM_conv1d);

void BM_sinc_build(benchmark::State& state) {
    sfec::SincLayer<float> bank(80, 251, 16000.0f);
    sfec::NoGradGuard ng;
    for (auto _ : state) {
        auto k = bank.build();
        benchmark::DoNotOptimize(k.values().data());
    }
}
BENCHMARK(BM_sinc_build);

void BM_sinc_window(benchmark::State& state) {
    sfec::SincLayer<float> bank(80, 251, 16000.0f);
    std::mt19937_64 rng(3);
    auto chunk = sfec::Tensor<float>::uniform({4000}, -1.0f, 1.0f, rng);
    sfec::NoGradGuard ng;
    for (auto _ : state) {
        auto y = bank.forward(chunk);
        benchmark::DoNotOptimize(y.values().data());
    }
}
BENCHMARK(BM_sinc_window);

void BM_bilstm(benchmark::State& state) {
    std::mt19937_64 rng(4);
    sfec::BiLSTM<float> net(50, 300, rng);
    auto x = sfec::Tensor<float>::uniform({100, 300}, -1.0f, 1.0f, rng);
    sfec::NoGradGuard ng;
    for (auto _ : state) {
        auto y = net.forward(x);
        benchmark::DoNotOptimize(y.values().data());
    }
}
BENCHMARK(BM_bilstm);

void BM_adam_step(benchmark::State& state) {
    std::mt19937_64 rng(5);
    sfec::Dense<float> layer(512, 6848, rng);
    sfec::ParamList<float> params;
    layer.collect("bench", params);
    sfec::mark_trainable(params);
    auto x = sfec::Tensor<float>::uniform({6848}, -1.0f, 1.0f, rng);
    sfec::backward(sfec::sum_all(layer.forward(x)));
    sfec::Adam<float> opt(0.001f);
    for (auto _ : state) {
        opt.step(params);
        benchmark::DoNotOptimize(layer.W.values().data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 512 * 6848);
}
BENCHMARK(BM_adam_step);

}  // namespace

BENCHMARK_MAIN();
