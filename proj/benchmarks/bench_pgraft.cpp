#include <random>

#include <benchmark/benchmark.h>

#include <pgraft/analytic.hpp>
#include <pgraft/batch.hpp>
#include <pgraft/detector.hpp>
#include <pgraft/mixture.hpp>
#include <pgraft/prompt.hpp>
#include <pgraft/wire.hpp>

using namespace pgraft;

namespace {

ConditionSet scene_conditions() {
    const std::vector<ItemSpec> items{{"rice"}, {"potato salad"}};
    const SceneSpec scene = SceneSpec::defaults();
    return make_conditions(compile_prompts(items), &scene);
}

void BM_MixtureVelocity(benchmark::State& state) {
    const auto set = scene_conditions();
    const MixtureSpec& spec = *set.target.mixture;
    Vector x{0.3, -0.2};
    double t = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mixture_velocity(x, t, spec));
        t = t > 0.9 ? 0.1 : t + 0.01;
    }
}
BENCHMARK(BM_MixtureVelocity);

void BM_SampleTrajectory(benchmark::State& state) {
    const auto set = scene_conditions();
    AnalyticBackend backend;
    AnalyticScorer scorer(6.0);
    SamplerConfig c;
    c.total_steps = static_cast<int>(state.range(0));
    const auto policy = GraftPolicy::dynamic();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample(c, set, backend, &scorer, policy));
        ++c.seed;
    }
    state.SetItemsProcessed(state.iterations() * c.total_steps);
}
BENCHMARK(BM_SampleTrajectory)->Arg(100)->Arg(500);

void BM_SampleBatch(benchmark::State& state) {
    const auto set = scene_conditions();
    AnalyticBackend backend;
    AnalyticScorer scorer(6.0);
    SamplerConfig c;
    const auto workers = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_batch(c, set, backend, &scorer, GraftPolicy::dynamic(), 256, workers));
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_SampleBatch)->Arg(1)->Arg(4)->UseRealTime();

void BM_DecideGraftStep(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gain(0.002, 0.004);
    SimilarityTrace trace;
    double score = 0.3;
    for (int s = 0; s <= 1000; ++s) {
        score += gain(rng);
        trace.push(s, score);
    }
    GraftPolicy p = GraftPolicy::dynamic();
    p.epsilon = 1e-5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(decide_graft_step(trace, p, 1000));
    }
}
BENCHMARK(BM_DecideGraftStep);

void BM_WireCodec(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    Vector v(n);
    for (auto& x : v) {
        x = normal(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(wire::decode_f32(wire::encode_f32(v)));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(n * 4));
}
BENCHMARK(BM_WireCodec)->Arg(2)->Arg(4 * 64 * 64);

}  // namespace

BENCHMARK_MAIN();
