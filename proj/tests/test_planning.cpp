#include <doctest.h>

#include "mfgp/error.hpp"
#include "mfgp/planning.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mfgp;
using std::numbers::pi;

namespace {

PlanningSpec trivial(int order = 0, double T = 1.0)
{
    PlanningSpec s{Grid(17, 32, T)};
    s.order = order;
    s.potential.assign(32, 0.0);
    s.m0.assign(32, 1.0);
    s.mT.assign(32, 1.0);
    return s;
}

// random admissible direction: zero boundary rows, zero row means
void random_direction(const Grid& g, std::mt19937_64& rng, Field& d, TimeSeries& dq)
{
    std::uniform_real_distribution<double> U(-1, 1);
    d = Field(g);
    dq.assign(g.nt(), 0.0);
    for (int n = 1; n < g.nt() - 1; ++n)
        for (int j = 0; j < g.nx(); ++j) d(n, j) = U(rng);
    remove_row_means(d);
    for (double& v : dq) v = U(rng);
}

// smooth admissible direction built from low space-time modes
void smooth_direction(const Grid& g, std::mt19937_64& rng, Field& d, TimeSeries& dq)
{
    std::uniform_real_distribution<double> U(-1, 1);
    d = Field(g);
    dq.assign(g.nt(), 0.0);
    for (int l = 1; l <= 2; ++l)
        for (int k = 1; k <= 3; ++k) {
            double a = U(rng), b = U(rng);
            for (int n = 1; n < g.nt() - 1; ++n)
                for (int j = 0; j < g.nx(); ++j)
                    d(n, j) += std::sin(l * pi * g.t(n) / g.horizon()) *
                               (a * std::cos(2 * pi * k * g.x(j)) + b * std::sin(2 * pi * k * g.x(j)));
        }
    remove_row_means(d);
    for (double& v : dq) v = U(rng);
}

}  // namespace

TEST_CASE("boundary slices")
{
    PlanningSpec s = trivial();
    auto [a, b] = boundary_slices(s);
    for (double v : a) CHECK(v == 0.0);

    PlanningSpec p = sine_instance(17, 32);
    auto [c, d] = boundary_slices(p);
    double dx = p.grid.dx();
    for (int j = 0; j < 32; ++j) CHECK(std::abs(c[j] + 0.1 * std::cos(2 * pi * j * dx) / (2 * pi)) <= 10 * dx);
    CHECK(std::abs(slice_mean(c)) < 1e-12);
    CHECK(std::abs(slice_mean(d)) < 1e-12);

    PlanningSpec bad = sine_instance(17, 32);
    bad.m0[0] += 0.5;
    CHECK_THROWS_AS(validate_spec(bad), DomainError);
}

TEST_CASE("initial guess")
{
    PotentialPair z = initial_guess(trivial());
    CHECK(z.phi.max_abs() == 0.0);
    for (double v : z.q) CHECK(v == 0.0);

    PlanningSpec p = sine_instance(17, 32);
    PotentialPair g = initial_guess(p);
    auto [a, b] = boundary_slices(p);
    for (int j = 0; j < 32; ++j) {
        CHECK(g.phi(0, j) == a[j]);
        CHECK(g.phi(16, j) == b[j]);
    }
    double dx = p.grid.dx();
    CHECK(min_density(g) >= 0.9 - 4 * pi * pi * 0.1 * dx * dx);
    CHECK(is_feasible(p, g, 0.0));
}

TEST_CASE("objective values")
{
    PlanningSpec s = trivial(0, 2.0);
    PotentialPair pp = initial_guess(s);
    CHECK(objective(s, pp) == doctest::Approx(1.0).epsilon(1e-14));  // T G(1)
    const double c = 0.7;
    for (double& v : pp.q) v = c;
    CHECK(objective(s, pp) == doctest::Approx(2.0 * (c * c / 2 + 0.5)).epsilon(1e-14));

    PotentialPair bad = initial_guess(s);
    for (int j = 0; j < 32; ++j) bad.phi(5, j) = (j % 2 == 0 ? 0.1 : -0.1);
    bad.phi(5, 1) = 0.2;
    CHECK(min_density(bad) < 0.0);
    CHECK(std::isinf(objective(s, bad)));
    CHECK_THROWS_AS(gradient(s, bad), DomainError);
}

TEST_CASE("gradient at the trivial minimizer vanishes")
{
    for (int order : {0, 1}) {
        PlanningSpec s = trivial(order);
        Gradient g = gradient(s, initial_guess(s));
        CHECK(g.dphi.max_abs() <= 1e-12);
        for (double v : g.dq) CHECK(std::abs(v) <= 1e-12);
    }
}

TEST_CASE("gradient matches central differences")
{
    std::mt19937_64 rng(42);
    for (int order : {0, 1}) {
        PlanningSpec s = sine_instance(17, 32, 0.1, order);
        for (int k = 0; k < 10; ++k) {
            PotentialPair pp = random_feasible(s, 100 + k);
            Gradient g = gradient(s, pp);
            for (int j = 0; j < 32; ++j) {
                CHECK(g.dphi(0, j) == 0.0);
                CHECK(g.dphi(16, j) == 0.0);
            }
            Field d(s.grid);
            TimeSeries dq;
            // with lambda = 1 the phi_xx term amplifies rough directions by 1/dx^2,
            // which puts h = 1e-5 outside the asymptotic range of the difference quotient
            if (order == 0)
                random_direction(s.grid, rng, d, dq);
            else
                smooth_direction(s.grid, rng, d, dq);
            const double h = 1e-5;
            PotentialPair a = pp, b = pp;
            for (std::size_t i = 0; i < d.values().size(); ++i) {
                a.phi.values()[i] += h * d.values()[i];
                b.phi.values()[i] -= h * d.values()[i];
            }
            for (int n = 0; n < 17; ++n) {
                a.q[n] += h * dq[n];
                b.q[n] -= h * dq[n];
            }
            double fd = (objective(s, a) - objective(s, b)) / (2 * h);
            double an = pairing(g, d, dq);
            CHECK(an == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("gradient with the power Hamiltonian and potential")
{
    PlanningSpec s = sine_instance(9, 16);
    s.hamiltonian = Hamiltonian::power(1.5);
    s.coupling = Coupling::power(3.0);
    for (int j = 0; j < 16; ++j) s.potential[j] = 0.2 * std::cos(2 * pi * s.grid.x(j));
    std::mt19937_64 rng(1);
    PotentialPair pp = random_feasible(s, 9);
    Gradient g = gradient(s, pp);
    Field d(s.grid);
    TimeSeries dq;
    random_direction(s.grid, rng, d, dq);
    const double h = 1e-5;
    PotentialPair a = pp, b = pp;
    for (std::size_t i = 0; i < d.values().size(); ++i) {
        a.phi.values()[i] += h * d.values()[i];
        b.phi.values()[i] -= h * d.values()[i];
    }
    for (int n = 0; n < 9; ++n) {
        a.q[n] += h * dq[n];
        b.q[n] -= h * dq[n];
    }
    CHECK(pairing(g, d, dq) == doctest::Approx((objective(s, a) - objective(s, b)) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("clip restores the density floor")
{
    PlanningSpec s = sine_instance(9, 16);
    PotentialPair pp = initial_guess(s);
    for (int j = 0; j < 16; ++j) pp.phi(4, j) += (j == 3 ? 0.2 : 0.0);
    remove_row_means(pp.phi);
    pp.phi.row(0)[0] = initial_guess(s).phi(0, 0);
    CHECK(min_density(pp) < 0.0);
    Field before = pp.phi;
    clip_density(pp.phi, 1e-3);
    CHECK(min_density(pp) >= 1e-3 - 1e-12);
    CHECK(std::abs(integrate_x(pp.phi, 4)) < 1e-14);
    for (int j = 0; j < 16; ++j) CHECK(pp.phi(0, j) == before(0, j));
}

TEST_CASE("objective is convex along random feasible segments")
{
    PlanningSpec s = sine_instance(17, 32);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 5; ++k) {
        PotentialPair a = random_feasible(s, 2 * k + 1), b = random_feasible(s, 2 * k + 2);
        double fa = objective(s, a), fb = objective(s, b);
        for (int r = 0; r < 20; ++r) {
            double t = U(rng);
            PotentialPair c = a;
            for (std::size_t i = 0; i < c.phi.values().size(); ++i)
                c.phi.values()[i] = t * a.phi.values()[i] + (1 - t) * b.phi.values()[i];
            for (int n = 0; n < 17; ++n) c.q[n] = t * a.q[n] + (1 - t) * b.q[n];
            CHECK(objective(s, c) <= t * fa + (1 - t) * fb + 1e-9);
        }
    }
}

TEST_CASE("minimize on trivial instances")
{
    for (int order : {0, 1}) {
        PlanningSpec s = trivial(order);
        SolveReport r = minimize(s);
        CHECK(r.converged);
        CHECK(r.minimizer.phi.max_abs() <= 1e-12);
        CHECK(r.objective == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("minimize on the sine instance")
{
    PlanningSpec s = sine_instance(9, 16);
    SolveReport r = minimize(s);
    REQUIRE(r.converged);
    CHECK(r.pg_norm <= s.opt.tolerance);
    for (std::size_t k = 1; k < r.trace.size(); ++k)
        CHECK(r.trace[k].objective <= r.trace[k - 1].objective * (1 + 1e-14));
    for (const auto& it : r.trace) {
        CHECK(it.mass_defect <= 1e-14);
        CHECK(it.min_density >= s.opt.delta_floor);
    }
    CHECK(r.trace.back().q_defect <= 10 * s.opt.tolerance);

    // warm start from a random feasible point reaches the same minimizer
    SolveReport r2 = minimize(s, random_feasible(s, 99));
    REQUIRE(r2.converged);
    CHECK((r.minimizer.phi - r2.minimizer.phi).max_abs() <= 1e-5);
}
