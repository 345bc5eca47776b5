#include "fbmclt/constants.hpp"
#include "fbmclt/fbm.hpp"
#include "fbmclt/functionals.hpp"
#include "fbmclt/moments.hpp"
#include "fbmclt/stats.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace fbmclt;

namespace {

void BM_sampler_circulant(benchmark::State& state) {
    const auto steps = static_cast<std::int64_t>(state.range(0));
    const FbmSampler sampler(HurstModel(0.4, 1), TimeGrid(1.0, steps), SamplerMethod::circulant);
    RngStream stream(1, 0);
    FbmPath a, b;
    for (auto _ : state) {
        sampler.sample_pair(stream, a, b);
        benchmark::DoNotOptimize(a.values.data());
    }
    state.SetItemsProcessed(state.iterations() * 2 * steps);
}
BENCHMARK(BM_sampler_circulant)->Arg(1 << 10)->Arg(1 << 13)->Arg(1 << 16);

void BM_sampler_cholesky(benchmark::State& state) {
    const auto steps = static_cast<std::int64_t>(state.range(0));
    const FbmSampler sampler(HurstModel(0.4, 1), TimeGrid(1.0, steps), SamplerMethod::cholesky);
    RngStream stream(1, 0);
    FbmPath a, b;
    for (auto _ : state) {
        sampler.sample_pair(stream, a, b);
        benchmark::DoNotOptimize(a.values.data());
    }
    state.SetItemsProcessed(state.iterations() * 2 * steps);
}
BENCHMARK(BM_sampler_cholesky)->Arg(1 << 8)->Arg(1 << 10);

void BM_chd_quadrature(benchmark::State& state) {
    const HurstModel model(0.4, 1);
    for (auto _ : state) benchmark::DoNotOptimize(chd_quadrature(model).value);
}
BENCHMARK(BM_chd_quadrature);

void BM_beta_norm_spectral(benchmark::State& state) {
    const TestFunction f(1.0, 2.0, 1.0, 1);
    riesz_constant(1.5, 1); // calibrate outside the timed loop
    for (auto _ : state) benchmark::DoNotOptimize(beta_norm_spectral(f, 1.5).value_squared);
}
BENCHMARK(BM_beta_norm_spectral);

void BM_limit_moment(benchmark::State& state) {
    const MomentSpec spec{{{0.0, 1.0}}, {static_cast<int>(state.range(0))}};
    const HurstModel model(0.4, 1);
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(limit_moment(spec, model, 65536, seed++).value);
    state.SetItemsProcessed(state.iterations() * 65536);
}
BENCHMARK(BM_limit_moment)->Arg(2)->Arg(4);

void BM_additive_functional(benchmark::State& state) {
    const auto steps = static_cast<std::int64_t>(state.range(0));
    const FbmSampler sampler(HurstModel(0.4, 1), TimeGrid(1.0, steps));
    const TestFunction f(1.0, 2.0, 1.0, 1);
    RngStream stream(2, 0);
    const FbmPath path = sampler.sample(stream);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            additive_functional(path, f, static_cast<double>(steps), 1.0).value);
    state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_additive_functional)->Arg(1 << 13)->Arg(1 << 16);

void BM_local_time_kernel(benchmark::State& state) {
    const std::int64_t steps = 8192;
    const FbmSampler sampler(HurstModel(0.4, 1), TimeGrid(1.0 / steps, steps));
    RngStream stream(3, 0);
    const FbmPath path = sampler.sample(stream);
    for (auto _ : state)
        benchmark::DoNotOptimize(local_time_estimate(path, 1.0, 1e-3).value);
    state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_local_time_kernel);

void BM_ks_two_sample(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    RngStream stream(4, 0);
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = stream.next_gaussian();
    for (auto& x : b) x = stream.next_gaussian();
    for (auto _ : state) benchmark::DoNotOptimize(ks_two_sample(a, b).d_stat);
    state.SetItemsProcessed(state.iterations() * 2 * n);
}
BENCHMARK(BM_ks_two_sample)->Arg(4000)->Arg(32000);

} // namespace

BENCHMARK_MAIN();
