#include <doctest.h>

#include "mfgp/error.hpp"
#include "mfgp/grid.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mfgp;
using std::numbers::pi;

namespace {

Field fill(const Grid& g, auto f)
{
    Field out(g);
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j) out(n, j) = f(g.t(n), g.x(j));
    return out;
}

double sup_diff(const Field& a, const Field& b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

}  // namespace

TEST_CASE("grid construction and weights")
{
    Grid g(17, 32, 2.0);
    CHECK(g.dt() == doctest::Approx(0.125));
    CHECK(g.dx() == 1.0 / 32);
    CHECK_THROWS_AS(Grid(2, 32, 1.0), ShapeError);
    CHECK_THROWS_AS(Grid(5, 3, 1.0), ShapeError);
    CHECK_THROWS_AS(Grid(5, 8, 0.0), DomainError);
    Field one(g, 1.0);
    CHECK(integrate_x(one, 3) == 1.0);
    CHECK(integrate_xt(one) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("dx_periodic")
{
    Grid g(5, 64, 1.0);
    CHECK(dx_periodic(Field(g, 1.0)).max_abs() == 0.0);
    Field s = fill(g, [](double, double x) { return std::sin(2 * pi * x); });
    Field exact = fill(g, [](double, double x) { return 2 * pi * std::cos(2 * pi * x); });
    Field d = dx_periodic(s);
    double dx = g.dx();
    CHECK(sup_diff(d, exact) <= std::pow(2 * pi, 3) * dx * dx / 6);
    for (int n = 0; n < g.nt(); ++n) CHECK(std::abs(integrate_x(d, n)) < 1e-14);
}

TEST_CASE("dxx_periodic")
{
    Grid g(4, 64, 1.0);
    CHECK(dxx_periodic(Field(g, 3.5)).max_abs() == 0.0);
    Field c = fill(g, [](double, double x) { return std::cos(2 * pi * x); });
    Field exact = fill(g, [](double, double x) { return -4 * pi * pi * std::cos(2 * pi * x); });
    CHECK(sup_diff(dxx_periodic(c), exact) <= std::pow(2 * pi, 4) * g.dx() * g.dx() / 12);
    Field d = dxx_periodic(c);
    for (int n = 0; n < g.nt(); ++n) CHECK(std::abs(integrate_x(d, n)) < 1e-12);
}

TEST_CASE("dt_interior")
{
    Grid g(50, 8, 1.0);
    CHECK(dt_interior(Field(g, 1.0)).max_abs() == 0.0);
    Field t = fill(g, [](double t, double) { return t; });
    Field d = dt_interior(t);
    for (double v : d.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    Field t2 = fill(g, [](double t, double) { return t * t; });
    Field d2 = dt_interior(t2);
    double dt = g.dt();
    for (int n = 0; n < g.nt(); ++n) {
        double err = std::abs(d2(n, 0) - 2 * g.t(n));
        if (n == 0 || n == g.nt() - 1)
            CHECK(err <= 1.01 * dt);  // one-sided: error exactly dt
        else
            CHECK(err <= 1e-12);      // central is exact on quadratics
    }
}

TEST_CASE("stencil transposes are exact adjoints")
{
    Grid g(9, 12, 1.3);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    Field a(g), b(g);
    for (double& v : a.values()) v = U(rng);
    for (double& v : b.values()) v = U(rng);
    auto dot = [](const Field& x, const Field& y) {
        double s = 0;
        for (std::size_t i = 0; i < x.values().size(); ++i) s += x.values()[i] * y.values()[i];
        return s;
    };
    // integration by parts for the central x stencil
    CHECK(std::abs(dot(a, dx_periodic(b)) + dot(dx_periodic(a), b)) < 1e-12);
    CHECK(std::abs(dot(a, dt_interior(b)) - dot(dt_transpose(a), b)) < 1e-12);
    CHECK(std::abs(dot(a, dxx_periodic(b)) - dot(dxx_periodic(a), b)) < 1e-9);
}

TEST_CASE("integration rules")
{
    Grid g(11, 16, 2.0);
    Field s = fill(g, [](double, double x) { return std::sin(2 * pi * x); });
    CHECK(std::abs(integrate_x(s, 4)) < 1e-15);
    Field t = fill(g, [](double t, double) { return t; });
    CHECK(integrate_xt(t) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("antiderivative_x")
{
    const int nx = 128;
    double dx = 1.0 / nx;
    Slice zero(nx, 0.0), one(nx, 1.0), c(nx);
    for (double v : antiderivative_x(zero, dx)) CHECK(v == 0.0);
    Slice F1 = antiderivative_x(one, dx);
    for (int j = 0; j < nx; ++j) CHECK(F1[j] == doctest::Approx(j * dx).epsilon(1e-14));
    for (int j = 0; j < nx; ++j) c[j] = std::cos(2 * pi * j * dx);
    Slice F = antiderivative_x(c, dx);
    for (int j = 0; j < nx; ++j) CHECK(std::abs(F[j] - std::sin(2 * pi * j * dx) / (2 * pi)) <= 10 * dx);
    // trapezoid: central difference of the antiderivative recovers f to second order
    double err = 0;
    for (int j = 1; j < nx - 1; ++j) err = std::max(err, std::abs((F[j + 1] - F[j - 1]) / (2 * dx) - c[j]));
    CHECK(err <= 4 * pi * pi * dx * dx);
}

TEST_CASE("shape mismatch")
{
    Field a(Grid(5, 8, 1.0)), b(Grid(5, 9, 1.0));
    CHECK_THROWS_AS(a += b, ShapeError);
    CHECK_THROWS_AS(inner_w(a, b), ShapeError);
}
