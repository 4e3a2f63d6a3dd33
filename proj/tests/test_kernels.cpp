#include <doctest.h>

#include "mfgp/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace mfgp::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed, double lo = -1, double hi = 1)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = U(rng);
    return v;
}

}  // namespace

TEST_CASE("omp stencils agree bitwise with the serial reference")
{
    const int nt = 23, nx = 37;
    auto in = random_vec(nt * nx, 1);
    std::vector<double> a(nt * nx), b(nt * nx);
    serial::dx_periodic(in, a, nt, nx, 0.1);
    omp::dx_periodic(in, b, nt, nx, 0.1);
    CHECK(a == b);
    serial::dxx_periodic(in, a, nt, nx, 0.1);
    omp::dxx_periodic(in, b, nt, nx, 0.1);
    CHECK(a == b);
    serial::dt_interior(in, a, nt, nx, 0.05);
    omp::dt_interior(in, b, nt, nx, 0.05);
    CHECK(a == b);
    serial::dt_transpose(in, a, nt, nx, 0.05);
    omp::dt_transpose(in, b, nt, nx, 0.05);
    CHECK(a == b);
    std::vector<double> s1(nt), s2(nt);
    serial::row_sums(in, s1, nt, nx);
    omp::row_sums(in, s2, nt, nx);
    CHECK(s1 == s2);
}

TEST_CASE("omp pointwise passes agree bitwise with the serial reference")
{
    const int nt = 9, nx = 16;
    auto z = random_vec(nt * nx, 2);
    auto m = random_vec(nt * nx, 3, 0.2, 2.0);
    m[5] = -0.1;  // infeasible node
    auto V = random_vec(nx, 4);
    PointwiseModel pm{[](double w) { return 0.5 * w * w; }, [](double w) { return w; },
                      [](double y) { return 0.5 * y * y; }, [](double y) { return y; }};
    std::vector<double> i1(nt * nx), i2(nt * nx), p1(nt * nx), p2(nt * nx), c1(nt * nx), c2(nt * nx);
    serial::planning_pointwise(pm, {z, m, V, i1, p1, c1}, nt, nx);
    omp::planning_pointwise(pm, {z, m, V, i2, p2, c2}, nt, nx);
    CHECK(i1 == i2);
    CHECK(std::isinf(i1[5]));
    for (int i = 0; i < nt * nx; ++i) {
        if (i == 5) continue;
        CHECK(p1[i] == p2[i]);
        CHECK(c1[i] == c2[i]);
    }

    m[5] = 0.7;
    std::vector<double> a1(nt * nx), a2(nt * nx), b1(nt * nx), b2(nt * nx), cc1(nt * nx), cc2(nt * nx);
    serial::congestion_quotients({z, m, a1, b1, cc1}, 0.5, 1.3);
    omp::congestion_quotients({z, m, a2, b2, cc2}, 0.5, 1.3);
    CHECK(a1 == a2);
    CHECK(b1 == b2);
    CHECK(cc1 == cc2);
}

TEST_CASE("hopf-lax lattice scan agrees and finds the minimum")
{
    std::vector<HopfLaxScan> scans;
    for (int s = 0; s < 40; ++s) {
        double c = 0.1 * s - 2.0;
        scans.push_back({[c](double y) { return (y - c) * (y - c); }, 0.0, 0.01, 300});
    }
    std::vector<int> k1(40), k2(40);
    std::vector<double> v1(40), v2(40);
    serial::hopf_lax_scan(scans, k1, v1);
    omp::hopf_lax_scan(scans, k2, v2);
    CHECK(k1 == k2);
    CHECK(v1 == v2);
    for (int s = 0; s < 40; ++s) CHECK(std::abs(k1[s] * 0.01 - (0.1 * s - 2.0)) <= 0.0051);
}
