#include <benchmark/benchmark.h>

#include "ccnet/model.hpp"

using namespace ccnet;

namespace {

FeatureMap<float> random_map(int features, int frames, RngStream& rng) {
    FeatureMap<float> m(features, frames);
    for (float& v : m.values) v = static_cast<float>(rng.next_double() * 2 - 1);
    return m;
}

ConvKernel<float> random_kernel(int in_f, int out_f, int k, int d, RngStream& rng) {
    ConvKernel<float> kern(in_f, out_f, k, d);
    for (float& v : kern.weights) v = static_cast<float>(rng.next_double() * 2 - 1);
    return kern;
}

// First conv layer of the small variant: 70 -> 256 features, kernel 7, l0 frames.
void bm_conv_forward(benchmark::State& state) {
    RngStream rng(1);
    const int frames = static_cast<int>(state.range(0));
    FeatureMap<float> in = random_map(70, frames, rng);
    ConvKernel<float> kern = random_kernel(70, 256, 7, 1, rng);
    for (auto _ : state) benchmark::DoNotOptimize(temporal_conv_forward(in, kern));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames));
}

void bm_conv_backward(benchmark::State& state) {
    RngStream rng(2);
    const int frames = static_cast<int>(state.range(0));
    FeatureMap<float> in = random_map(70, frames, rng);
    ConvKernel<float> kern = random_kernel(70, 256, 7, 1, rng);
    FeatureMap<float> upstream = random_map(256, conv_output_length(frames, 7, 1), rng);
    for (auto _ : state) benchmark::DoNotOptimize(temporal_conv_backward(in, kern, upstream));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames));
}

void bm_maxpool(benchmark::State& state) {
    RngStream rng(3);
    FeatureMap<float> in = random_map(256, static_cast<int>(state.range(0)), rng);
    PoolSpec pool{3, 3};
    for (auto _ : state) benchmark::DoNotOptimize(temporal_maxpool_forward(in, pool));
}

void bm_quantize(benchmark::State& state) {
    Alphabet alphabet = build_alphabet(CaseMode::fold_lower);
    RngStream rng(4);
    std::string text;
    for (int i = 0; i < 2000; ++i) text += static_cast<char>('a' + rng.next_below(26));
    for (auto _ : state) benchmark::DoNotOptimize(quantize<float>(text, alphabet, 1014));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}

// One train-mode forward/backward/step on the tiny variant (batch of 16).
void bm_tiny_train_step(benchmark::State& state) {
    ModelConfig cfg;
    cfg.variant = Variant::tiny;
    cfg.alphabet = build_alphabet(CaseMode::fold_lower);
    cfg.l0 = 32;
    cfg.num_classes = 2;
    cfg.dropout_p = 0.1;
    Model<float> model = build_model<float>(cfg, 5);
    RngStream rng(6);
    std::vector<FeatureMap<float>> batch;
    std::vector<int> labels;
    for (int b = 0; b < 16; ++b) {
        FeatureMap<float> m(cfg.alphabet.size(), cfg.l0);
        for (int x = 0; x < cfg.l0; ++x)
            m.at(static_cast<int>(rng.next_below(cfg.alphabet.size())), x) = 1.0f;
        batch.push_back(std::move(m));
        labels.push_back(1 + static_cast<int>(b % 2));
    }
    RngStream dropout_rng(7);
    for (auto _ : state) {
        model.forward(batch, RunMode::train, &dropout_rng);
        benchmark::DoNotOptimize(model.backward(labels));
    }
    state.SetItemsProcessed(state.iterations() * 16);
}

} // namespace

BENCHMARK(bm_conv_forward)->Arg(256)->Arg(1014);
BENCHMARK(bm_conv_backward)->Arg(256)->Arg(1014);
BENCHMARK(bm_maxpool)->Arg(1008);
BENCHMARK(bm_quantize);
BENCHMARK(bm_tiny_train_step);

BENCHMARK_MAIN();
