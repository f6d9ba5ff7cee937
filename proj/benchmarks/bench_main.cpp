#include <benchmark/benchmark.h>

#include <random>

#include "kirflow/driver.hpp"
#include "kirflow/kdtree.hpp"
#include "kirflow/kirchhoff.hpp"
#include "kirflow/lrbf.hpp"
#include "kirflow/scenario.hpp"

using namespace kirflow;

namespace {

const std::filesystem::path data_dir = KIRFLOW_BENCH_DATA;

SoilParams clay() { return make_soil("clay", 0.09, 0.475, 0.0144, -0.3731, 0.131, 18.2672); }

void BM_ForwardInverse(benchmark::State& st) {
    const auto p = clay();
    double h = -2.0;
    for (auto _ : st) {
        h = inverse(forward(h, p, p.h_d), p, p.h_d);
        benchmark::DoNotOptimize(h);
    }
}
BENCHMARK(BM_ForwardInverse);

// Gram assembly plus binary128 factorization of one influence domain.
void BM_LocalGram(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    std::vector<Point> off;
    const int side = static_cast<int>(std::ceil(std::sqrt(n)));
    for (int k = 0; k < n; ++k) off.push_back({0.01 * (k % side), 0.0, 0.01 * (k / side)});
    for (auto _ : st) {
        LocalSystem ls(off, 0.8);
        benchmark::DoNotOptimize(ls.condition());
    }
}
BENCHMARK(BM_LocalGram)->Arg(5)->Arg(9)->Arg(25);

void BM_KdTreeDomains(benchmark::State& st) {
    Extents e;
    e.dims = 2;
    e.l1 = 1.0;
    e.L = 1.0;
    const int n = static_cast<int>(st.range(0));
    const auto cloud = build_grid(e, {n, 1, n});
    for (auto _ : st) benchmark::DoNotOptimize(influence_domains(cloud, 9));
    st.SetItemsProcessed(st.iterations() * cloud.size());
}
BENCHMARK(BM_KdTreeDomains)->Arg(51)->Arg(201);

void BM_KdTreeRandom(benchmark::State& st) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<Point> pts(static_cast<std::size_t>(st.range(0)));
    for (auto& p : pts) p = {U(rng), U(rng), U(rng)};
    const KdTree tree(pts);
    std::size_t q = 0;
    for (auto _ : st) benchmark::DoNotOptimize(tree.nearest(pts[q++ % pts.size()], 27));
}
BENCHMARK(BM_KdTreeRandom)->Arg(1000)->Arg(100000);

void BM_OperatorSetup(benchmark::State& st) {
    Extents e;
    e.dims = 2;
    e.l1 = 1.0;
    e.L = 1.0;
    const int n = static_cast<int>(st.range(0));
    const auto cloud = build_grid(e, {n, 1, n});
    KernelConfig k;
    k.c = 0.8;
    for (auto _ : st) {
        LrbfOperators ops(cloud, 9, k);
        benchmark::DoNotOptimize(ops.diagnostics().max_condition);
    }
}
BENCHMARK(BM_OperatorSetup)->Arg(51)->Arg(101)->Unit(benchmark::kMillisecond);

// A few backward Euler steps of a shipped scenario, setup included.
void BM_ScenarioSteps(benchmark::State& st, const char* name, double scale, double steps) {
    auto s = parse_scenario(data_dir / "scenarios" / name);
    Overrides o;
    o.grid_scale = scale;
    o.t_end = steps * s.stepper.dt;
    s = apply_overrides(s, o);
    for (auto _ : st) benchmark::DoNotOptimize(run_scenario(s).mass.back());
}
BENCHMARK_CAPTURE(BM_ScenarioSteps, clay_1d, "clay_1d.yaml", 1.0, 20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ScenarioSteps, curvilinear_2d, "curvilinear_2d.yaml", 0.1, 5)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ScenarioSteps, layered_3d, "layered_3d.yaml", 0.1, 5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
