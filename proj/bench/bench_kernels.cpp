#include "mfgp/kernels.hpp"
#include "mfgp/model.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

namespace k = mfgp::kernels;

namespace {

struct Arrays {
    int nt, nx;
    std::vector<double> in, out, z, m, V, integrand, pz, cm, a, b, c;

    Arrays(int nt_, int nx_) : nt(nt_), nx(nx_)
    {
        const std::size_t n = static_cast<std::size_t>(nt) * nx;
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> U(-1, 1), P(0.5, 1.5);
        in.resize(n);
        z.resize(n);
        m.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            in[i] = U(rng);
            z[i] = U(rng);
            m[i] = P(rng);
        }
        V.assign(nx, 0.0);
        for (auto* v : {&out, &integrand, &pz, &cm, &a, &b, &c}) v->assign(n, 0.0);
    }
};

k::PointwiseModel quadratic_model()
{
    return {[](double w) { return 0.5 * w * w; }, [](double w) { return w; }, [](double z) { return 0.5 * z * z; },
            [](double z) { return z; }};
}

template <bool Omp>
void BM_dx_periodic(benchmark::State& st)
{
    Arrays A(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    for (auto _ : st) {
        if constexpr (Omp)
            k::omp::dx_periodic(A.in, A.out, A.nt, A.nx, 1.0 / A.nx);
        else
            k::serial::dx_periodic(A.in, A.out, A.nt, A.nx, 1.0 / A.nx);
        benchmark::DoNotOptimize(A.out.data());
    }
    st.SetItemsProcessed(st.iterations() * A.in.size());
}

template <bool Omp>
void BM_dt_transpose(benchmark::State& st)
{
    Arrays A(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    for (auto _ : st) {
        if constexpr (Omp)
            k::omp::dt_transpose(A.in, A.out, A.nt, A.nx, 1.0 / (A.nt - 1));
        else
            k::serial::dt_transpose(A.in, A.out, A.nt, A.nx, 1.0 / (A.nt - 1));
        benchmark::DoNotOptimize(A.out.data());
    }
    st.SetItemsProcessed(st.iterations() * A.in.size());
}

template <bool Omp>
void BM_planning_pointwise(benchmark::State& st)
{
    Arrays A(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    k::PointwiseModel model = quadratic_model();
    k::PlanningPass pass{A.z, A.m, A.V, A.integrand, A.pz, A.cm};
    for (auto _ : st) {
        if constexpr (Omp)
            k::omp::planning_pointwise(model, pass, A.nt, A.nx);
        else
            k::serial::planning_pointwise(model, pass, A.nt, A.nx);
        benchmark::DoNotOptimize(A.integrand.data());
    }
    st.SetItemsProcessed(st.iterations() * A.z.size());
}

template <bool Omp>
void BM_congestion_quotients(benchmark::State& st)
{
    Arrays A(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    k::Quotients q{A.z, A.m, A.a, A.b, A.c};
    for (auto _ : st) {
        if constexpr (Omp)
            k::omp::congestion_quotients(q, 0.5, 1.3);
        else
            k::serial::congestion_quotients(q, 0.5, 1.3);
        benchmark::DoNotOptimize(A.a.data());
    }
    st.SetItemsProcessed(st.iterations() * A.z.size());
}

template <bool Omp>
void BM_hopf_lax_scan(benchmark::State& st)
{
    const int points = static_cast<int>(st.range(0)), half = static_cast<int>(st.range(1));
    std::vector<k::HopfLaxScan> scans;
    for (int i = 0; i < points; ++i) {
        double x = -1.0 + 2.0 * i / points;
        scans.push_back({[x](double y) { return 0.25 * std::sin(3 * y) + (x - y) * (x - y); }, x, 1e-3, half});
    }
    std::vector<int> best(points);
    std::vector<double> value(points);
    for (auto _ : st) {
        if constexpr (Omp)
            k::omp::hopf_lax_scan(scans, best, value);
        else
            k::serial::hopf_lax_scan(scans, best, value);
        benchmark::DoNotOptimize(value.data());
    }
    st.SetItemsProcessed(st.iterations() * points * (2 * half + 1));
}

void grids(benchmark::internal::Benchmark* b)
{
    for (auto [nt, nx] : {std::pair{17, 32}, {65, 128}, {257, 512}, {1025, 2048}}) b->Args({nt, nx});
}

}  // namespace

BENCHMARK(BM_dx_periodic<false>)->Name("dx_periodic/serial")->Apply(grids);
BENCHMARK(BM_dx_periodic<true>)->Name("dx_periodic/omp")->Apply(grids);
BENCHMARK(BM_dt_transpose<false>)->Name("dt_transpose/serial")->Apply(grids);
BENCHMARK(BM_dt_transpose<true>)->Name("dt_transpose/omp")->Apply(grids);
BENCHMARK(BM_planning_pointwise<false>)->Name("planning_pointwise/serial")->Apply(grids);
BENCHMARK(BM_planning_pointwise<true>)->Name("planning_pointwise/omp")->Apply(grids);
BENCHMARK(BM_congestion_quotients<false>)->Name("congestion_quotients/serial")->Apply(grids);
BENCHMARK(BM_congestion_quotients<true>)->Name("congestion_quotients/omp")->Apply(grids);
BENCHMARK(BM_hopf_lax_scan<false>)->Name("hopf_lax_scan/serial")->Args({201, 400})->Args({801, 1600});
BENCHMARK(BM_hopf_lax_scan<true>)->Name("hopf_lax_scan/omp")->Args({201, 400})->Args({801, 1600});

BENCHMARK_MAIN();
