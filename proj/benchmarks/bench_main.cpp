#include "sard/filters.hpp"
#include "sard/metrics.hpp"
#include "sard/nn/inference.hpp"
#include "sard/nn/layers.hpp"
#include "sard/nn/loss.hpp"
#include "sard/nn/network.hpp"
#include "sard/speckle.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace sard;

namespace {

ImageGrid noisy_image(std::size_t size) {
    return apply_multiplicative(ImageGrid(size, size, 1, 0.5f), sample_gamma_speckle(size, size, 1, 4, 1));
}

nn::BasicTensor<float> random_tensor(std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    nn::BasicTensor<float> t(n, h, w, c);
    for (auto& v : t.data) v = u(gen);
    return t;
}

void BM_GammaSpeckle(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sample_gamma_speckle(size, size, 1, 4, 3));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size * size));
}
BENCHMARK(BM_GammaSpeckle)->Arg(256)->Arg(1024);

void BM_ConvForward(benchmark::State& state) {
    const nn::Conv3x3<float> conv(64, 64, 0);
    const auto params = random_tensor(1, 1, 1, conv.param_count()).data;
    const auto in = random_tensor(1, 96, 96, 64);
    nn::BasicTensor<float> out;
    std::vector<float> col;
    for (auto _ : state) {
        conv.forward(params.data(), in, out, col);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_ConvForward)->Unit(benchmark::kMillisecond);

void BM_ConvBackward(benchmark::State& state) {
    const nn::Conv3x3<float> conv(64, 64, 0);
    const auto params = random_tensor(1, 1, 1, conv.param_count()).data;
    std::vector<float> grads(conv.param_count());
    const auto in = random_tensor(1, 96, 96, 64);
    const auto dout = random_tensor(1, 96, 96, 64);
    nn::BasicTensor<float> out, din;
    std::vector<float> col;
    conv.forward(params.data(), in, out, col);
    for (auto _ : state) {
        conv.backward(params.data(), grads.data(), in, dout, &din, col);
        benchmark::DoNotOptimize(din.data.data());
    }
}
BENCHMARK(BM_ConvBackward)->Unit(benchmark::kMillisecond);

void BM_NetworkInference(benchmark::State& state) {
    nn::Network net;
    net.init(4);
    const ImageGrid img = clamp_unit(noisy_image(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(nn::predict(net, img));
}
BENCHMARK(BM_NetworkInference)->Arg(96)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
    nn::Network net;
    net.init(5);
    const auto x = random_tensor(4, 48, 48, 1);
    auto in = x;
    for (auto& v : in.data) v = 0.5f + 0.4f * v;
    auto truth = in;
    nn::BasicTensor<float> y, dy;
    for (auto _ : state) {
        net.zero_grad();
        net.forward(in, y, nn::Mode::Train);
        nn::batch_loss(y, truth, nn::LossWeights{1.0, 1.0, 1e-5}, &dy);
        net.backward(dy);
        benchmark::DoNotOptimize(net.grads().data());
    }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

template <typename F>
void filter_bench(benchmark::State& state, F&& filter) {
    const ImageGrid img = noisy_image(256);
    for (auto _ : state) benchmark::DoNotOptimize(filter(img));
}

void BM_Lee(benchmark::State& s) { filter_bench(s, [](const ImageGrid& i) { return lee_filter(i, {7}, 4.0); }); }
void BM_Frost(benchmark::State& s) { filter_bench(s, [](const ImageGrid& i) { return frost_filter(i, {7}); }); }
void BM_Median(benchmark::State& s) { filter_bench(s, [](const ImageGrid& i) { return median_filter(i, {7}); }); }
void BM_Bilateral(benchmark::State& s) {
    filter_bench(s, [](const ImageGrid& i) { return bilateral_filter(i, 1.5, 0.5, 7); });
}
BENCHMARK(BM_Lee)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Frost)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Median)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bilateral)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
    const ImageGrid a = noisy_image(256);
    const ImageGrid b = noisy_image(256);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b, 7));
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
