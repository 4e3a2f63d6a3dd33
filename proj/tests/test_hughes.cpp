#include <doctest.h>

#include "mfgp/error.hpp"
#include "mfgp/hughes.hpp"

#include <algorithm>
#include <cmath>

using namespace mfgp;

namespace {

HughesSpec sampled(double a, double b, int n, double (*rho)(double))
{
    HughesSpec s;
    s.x_min = a;
    s.x_max = b;
    s.rho0.resize(n);
    for (int j = 0; j < n; ++j) s.rho0[j] = rho(s.x(j));
    return s;
}

double ramp(double x) { return 0.5 + 0.3 * std::tanh(x / 0.4); }
double ramp_down(double x) { return ramp(-x); }

// sup over p >= 0 (p in R for the quadratic law) of p w - H(p) on a fine bracket
double brute_lagrangian(const HughesSpec& s, double w)
{
    double best = -1e300;
    const double lo = s.law == SpeedLaw::linear ? -20.0 : 1e-9;
    for (int i = 0; i <= 400000; ++i) {
        double p = lo + (40.0 - lo) * i / 400000.0;
        best = std::max(best, p * w - s.hamiltonian(p));
    }
    return best;
}

}  // namespace

TEST_CASE("cumulative potential")
{
    HughesSpec z = sampled(-1, 1, 41, [](double) { return 0.0; });
    for (double v : cumulative_potential(z)) CHECK(v == 0.0);

    HughesSpec c = sampled(-1, 1, 41, [](double) { return 0.4; });
    std::vector<double> cc = cumulative_potential(c);
    for (int j = 0; j < 41; ++j) CHECK(std::abs(cc[j] - 0.4 * (c.x(j) + 1.0)) <= 1e-14);

    HughesSpec st = sampled(-1, 1, 41, [](double x) { return x >= 0.0 ? 0.6 : 0.0; });
    std::vector<double> sc = cumulative_potential(st);
    for (int j = 0; j < 41; ++j) CHECK(std::abs(sc[j] - 0.6 * std::max(st.x(j), 0.0)) <= 0.6 * st.h());
    for (int j = 1; j < 41; ++j) CHECK(sc[j] >= sc[j - 1]);

    // the interpolant reproduces the nodes and extends linearly
    for (int j = 0; j < 41; ++j) CHECK(initial_potential(st, sc, st.x(j)) == doctest::Approx(sc[j]).epsilon(1e-14));
    CHECK(initial_potential(st, sc, 1.5) == doctest::Approx(sc.back() + 0.3));
}

TEST_CASE("Legendre transforms")
{
    HughesSpec s = sampled(-1, 1, 11, [](double) { return 0.5; });
    CHECK(s.lagrangian(0.0) == doctest::Approx(0.25).epsilon(1e-14));
    for (double w : {-2.0, -0.5, 0.0, 0.7, 1.5}) CHECK(std::abs(s.lagrangian(w) - brute_lagrangian(s, w)) <= 1e-6);

    s.law = SpeedLaw::congestion;
    s.k1 = 0.8;
    s.k2 = 1.3;
    s.beta = 0.3;
    for (double w : {-3.0, -1.0, -0.6}) CHECK(std::abs(s.lagrangian(w) - brute_lagrangian(s, w)) <= 1e-5);
    CHECK(std::isinf(s.lagrangian(0.1)));

    HughesSpec d = s;
    d.branch = Branch::decreasing;
    CHECK(d.lagrangian(0.6) == doctest::Approx(-s.lagrangian(-0.6)).epsilon(1e-14));
    // concave branch: inf_p (p w - H(p)) = -sup_p (p (-w) + H(p))
    d.law = SpeedLaw::linear;
    for (double w : {-1.0, 0.0, 0.8}) {
        double best = 1e300;
        for (int i = 0; i <= 400000; ++i) {
            double p = -20.0 + 40.0 * i / 400000.0;
            best = std::min(best, p * w - d.hamiltonian(p));
        }
        CHECK(std::abs(d.lagrangian(w) - best) <= 1e-6);
    }
}

TEST_CASE("constant density is transported unchanged")
{
    const double c = 0.3;
    HughesSpec s = sampled(-2, 2, 161, [](double) { return 0.3; });
    s.t_final = 0.8;
    s.nt = 9;
    HughesSolution sol = solve_hughes(s);
    REQUIRE(sol.x.size() > 10);
    for (std::size_t n = 0; n < sol.t.size(); ++n)
        for (std::size_t j = 0; j < sol.x.size(); ++j) {
            int i = static_cast<int>(n), k = static_cast<int>(j);
            CHECK(std::abs(sol.at(sol.rho, i, k) - c) <= 1e-8);
            double exact = c * (sol.x[j] + 2.0) + c * (1.0 - c) * sol.t[n];
            CHECK(std::abs(sol.at(sol.phi, i, k) - exact) <= 1e-10);
            CHECK(std::abs(sol.at(sol.argmin, i, k) - (sol.x[j] - (2 * c - 1) * sol.t[n])) <= 1e-6);
        }
    CHECK(sol.eikonal_residual <= 1e-8);

    s.law = SpeedLaw::congestion;
    s.beta = 0.25;
    s.k1 = 0.5;
    s.t_final = 0.2;
    HughesSolution cs = solve_hughes(s);
    for (double r : cs.rho) CHECK(std::abs(r - c) <= 1e-8);
    CHECK(cs.eikonal_residual <= 1e-7);
}

TEST_CASE("small-time limit")
{
    HughesSpec s = sampled(-2, 2, 201, ramp);
    std::vector<double> cum = cumulative_potential(s);
    for (double x : {-1.0, -0.3, 0.0, 0.45, 1.2}) {
        HopfLaxValue v = hopf_lax(s, 1e-6, x);
        CHECK(std::abs(v.value - initial_potential(s, cum, x)) <= 10 * s.h());
        CHECK(std::abs(v.argmin - x) <= 2 * s.h());
    }
    CHECK_THROWS_AS(hopf_lax(s, 0.0, 0.0), DomainError);
}

TEST_CASE("window too small")
{
    HughesSpec s = sampled(-1, 1, 81, [](double) { return 0.9; });
    CHECK_THROWS_AS(hopf_lax(s, 1.0, -0.7), WindowTooSmallError);
    CHECK_NOTHROW(hopf_lax(s, 1.0, 0.7));
    s.t_final = 5.0;
    CHECK_THROWS_AS(solve_hughes(s), WindowTooSmallError);
}

TEST_CASE("spec validation")
{
    HughesSpec s = sampled(-1, 1, 21, ramp);
    CHECK_NOTHROW(validate_spec(s));
    s.branch = Branch::decreasing;
    CHECK_THROWS_AS(validate_spec(s), DomainError);
    HughesSpec big = sampled(-1, 1, 21, [](double) { return 1.5; });
    CHECK_THROWS_AS(validate_spec(big), DomainError);
    HughesSpec cong = sampled(-1, 1, 21, ramp);
    cong.law = SpeedLaw::congestion;
    cong.beta = 0.6;
    CHECK_THROWS_AS(validate_spec(cong), DomainError);
}

TEST_CASE("mirror symmetry between the branches")
{
    HughesSpec up = sampled(-2, 2, 161, ramp);
    HughesSpec down = sampled(-2, 2, 161, ramp_down);
    down.branch = Branch::decreasing;
    up.t_final = down.t_final = 0.6;
    HughesSolution a = solve_hughes(up), b = solve_hughes(down);
    REQUIRE(a.x.size() == b.x.size());
    const double mass = cumulative_potential(up).back();
    const int nx = static_cast<int>(a.x.size());
    for (int n = 0; n < static_cast<int>(a.t.size()); ++n)
        for (int j = 0; j < nx; ++j) {
            CHECK(std::abs(b.at(b.phi, n, j) - (mass - a.at(a.phi, n, nx - 1 - j))) <= 1e-8);
            CHECK(std::abs(b.at(b.rho, n, j) - a.at(a.rho, n, nx - 1 - j)) <= 1e-8);
        }
}

TEST_CASE("ramp: maximum principle, mass flux bound, monotone dependence")
{
    HughesSpec s = sampled(-3, 3, 241, ramp);
    s.t_final = 1.0;
    HughesSolution sol = solve_hughes(s);
    auto [lo, hi] = std::minmax_element(s.rho0.begin(), s.rho0.end());
    for (double r : sol.rho) {
        CHECK(r >= *lo - 10 * s.h());
        CHECK(r <= *hi + 10 * s.h());
    }
    const int nx = static_cast<int>(sol.x.size());
    double flux = 0.0;
    for (double r : s.rho0) flux = std::max(flux, std::abs(r * s.speed(r)));
    for (int n = 0; n < static_cast<int>(sol.t.size()); ++n) {
        double m = sol.at(sol.phi, n, nx - 1) - sol.at(sol.phi, n, 0);
        double m0 = sol.at(sol.phi, 0, nx - 1) - sol.at(sol.phi, 0, 0);
        CHECK(std::abs(m - m0) <= 2 * sol.t[n] * flux + 1e-12);
    }

    HughesSpec more = s;
    for (double& r : more.rho0) r += 0.05;
    for (double t : {0.25, 1.0})
        for (double x : {-1.0, 0.0, 0.5, 1.5}) CHECK(hopf_lax(more, t, x).value >= hopf_lax(s, t, x).value);
}

TEST_CASE("eikonal residual under refinement")
{
    std::vector<double> res;
    for (int k = 0; k < 3; ++k) {
        int n = 80 << k;
        HughesSpec s = sampled(-2, 2, n + 1, ramp);
        s.t_final = 0.5;
        s.nt = (10 << k) + 1;
        res.push_back(solve_hughes(s).eikonal_residual);
    }
    CAPTURE(res[0]);
    CAPTURE(res[1]);
    CAPTURE(res[2]);
    CHECK(res[1] <= 0.5 * res[0]);
    CHECK(res[2] <= 0.5 * res[1]);
}
