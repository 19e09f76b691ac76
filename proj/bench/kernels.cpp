// Serial reference vs OpenMP path for the hot kernels.
#include "wabc/aao.hpp"
#include "wabc/abc.hpp"
#include "wabc/metrics.hpp"
#include "wabc/problems.hpp"
#include "wabc/theory.hpp"
#include "wabc/transport.hpp"

#include <benchmark/benchmark.h>

using namespace wabc;

namespace {

Exec exec_of(const benchmark::State& state)
{
    return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

PointCloud med_data(std::size_t n)
{
    Rng rng(1);
    return add_noise(med_front(3, n, rng), 0.1, rng);
}

void BM_rejection_abc(benchmark::State& state)
{
    const auto data = med_data(50);
    const auto hp = init_hyperparams(data, 3);
    const CloudDistance w2 = [](const PointCloud& a, const PointCloud& b) { return wasserstein2(a, b); };
    const double delta = estimate_delta(hp, data, 100, w2, 2);
    for (auto _ : state) {
        auto r = rejection_abc(data, hp, delta, 20, 2000, w2, 3, exec_of(state));
        benchmark::DoNotOptimize(r.attempted);
    }
}
BENCHMARK(BM_rejection_abc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_gd(benchmark::State& state)
{
    Rng rng(4);
    const auto x = med_front(3, 2000, rng);
    const auto y = med_front(3, 2000, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gd(x, y, exec_of(state)));
    }
}
BENCHMARK(BM_gd)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_project_all(benchmark::State& state)
{
    const auto data = med_data(200);
    const auto params = initial_parameters(data);
    const BezierModel model(fit_control_points(data, params, 3).control_points);
    const AaoConfig cfg;
    for (auto _ : state) {
        auto p = project_all(model, data, params, cfg, exec_of(state));
        benchmark::DoNotOptimize(p.data());
    }
}
BENCHMARK(BM_project_all)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_toy_stream(benchmark::State& state)
{
    Rng rng(5);
    const ToyProposalStream stream(ToyKind::gaussian, toy_data(ToyKind::gaussian, 100, rng), 6);
    std::vector<ToyProposal> out(256);
    for (auto _ : state) {
        stream.fill(0, out, exec_of(state));
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_toy_stream)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
