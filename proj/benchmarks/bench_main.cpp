#include <benchmark/benchmark.h>

#include "tgdfer/autograd.hpp"
#include "tgdfer/ops.hpp"
#include "tgdfer/synthetic.hpp"
#include "tgdfer/trainer.hpp"

using namespace tgdfer;

namespace {

void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng = make_rng(1);
    const auto a = normal_tensor(rng, {n, n}, 1.0), b = normal_tensor(rng, {n, n}, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(32)->Arg(128);

void BM_Attention(benchmark::State& state) {
    const auto frames = static_cast<std::size_t>(state.range(0));
    const auto block = static_cast<std::size_t>(state.range(1));
    Rng rng = make_rng(2);
    const auto q = normal_tensor(rng, {frames, 32}, 1.0), k = normal_tensor(rng, {frames, 32}, 1.0),
               v = normal_tensor(rng, {frames, 32}, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(multi_head_attention(q, k, v, 4, block));
}
BENCHMARK(BM_Attention)->Args({16, 16})->Args({52, 4})->Args({64, 64});

struct BagFixture {
    SyntheticData data = generate_synthetic(SyntheticSpec{}, 42);
    TgdferModel model{TrainConfig{}, 32, data.class_names, data.descriptors};
};

BagFixture& fixture() {
    static BagFixture f;
    return f;
}

void BM_BagForward(benchmark::State& state) {
    auto& f = fixture();
    const auto& bag = f.data.bags.front().bag;
    for (auto _ : state) benchmark::DoNotOptimize(f.model.forward(bag.features).prediction.predicted);
}
BENCHMARK(BM_BagForward)->Unit(benchmark::kMicrosecond);

void BM_BagForwardBackward(benchmark::State& state) {
    auto& f = fixture();
    const auto& bag = f.data.bags.front().bag;
    for (auto _ : state) {
        const auto out = f.model.forward(bag.features);
        backward(f.model.loss(out, bag.label));
        f.model.parameters().zero_grad();
    }
}
BENCHMARK(BM_BagForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_Evaluate(benchmark::State& state) {
    auto& f = fixture();
    const auto test = f.data.split(Split::test);
    const auto threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(f.model, test, threads).report.war);
}
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
