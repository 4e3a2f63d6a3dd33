#include <doctest.h>

#include "mfgp/error.hpp"
#include "mfgp/model.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace mfgp;

namespace {

// brute-force sup_p (p w - H(p)) by repeated lattice refinement
double sup_oracle(const std::function<double(double)>& H, double w, double lo = -1e3, double hi = 1e3)
{
    double best = lo;
    for (int level = 0; level < 12; ++level) {
        const int N = 4000;
        double h = (hi - lo) / N, bv = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= N; ++i) {
            double p = lo + i * h, v = p * w - H(p);
            if (v > bv) {
                bv = v;
                best = p;
            }
        }
        lo = best - 2 * h;
        hi = best + 2 * h;
    }
    return best * w - H(best);
}

}  // namespace

TEST_CASE("legendre of the quadratic Hamiltonian")
{
    Hamiltonian H = Hamiltonian::quadratic();
    CHECK(std::abs(legendre(H, 0.0).value) < 1e-14);
    double oracle = sup_oracle([](double p) { return 0.5 * p * p; }, 3.0);
    CHECK(oracle == doctest::Approx(4.5).epsilon(1e-10));
    CHECK(legendre(H, 3.0).value == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(legendre(H, 3.0).argmax == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("legendre of power Hamiltonians against a dense p-grid sup")
{
    for (double alpha : {2.0, 1.5, 3.0}) {
        Hamiltonian H = Hamiltonian::power(alpha);
        auto h = [alpha](double p) { return std::pow(1 + p * p, alpha / 2); };
        for (double w : {-2.5, -0.3, 0.0, 0.7, 4.0}) {
            double oracle = sup_oracle(h, w);
            LegendreResult r = legendre(H, w);
            CHECK(r.value == doctest::Approx(oracle).epsilon(1e-9));
            // argmax inverts H'
            CHECK(H.derivative(r.argmax) == doctest::Approx(w).epsilon(1e-8).scale(1.0));
        }
    }
    // closed form for alpha = 2: L(w) = w^2/4 - 1
    Lagrangian L(Hamiltonian::power(2.0));
    CHECK(L(3.0) == doctest::Approx(1.25));
    CHECK(legendre(Hamiltonian::power(2.0), 3.0).value == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("legendre involution")
{
    for (double alpha : {2.0, 1.7}) {
        Hamiltonian H = Hamiltonian::power(alpha);
        Lagrangian L(H);
        for (double p : {-1.5, -0.2, 0.0, 0.9, 2.0}) {
            // H(p) = sup_w (p w - L(w)), attained at w = H'(p)
            double w0 = H.derivative(p);
            double best = -1e300;
            for (int k = -2000; k <= 2000; ++k) {
                double w = w0 + k * 1e-5;
                best = std::max(best, p * w - L(w));
            }
            CHECK(best == doctest::Approx(H(p)).epsilon(1e-8));
        }
    }
}

TEST_CASE("legendre error carries w")
{
    Hamiltonian lin = Hamiltonian::custom("abs", [](double p) { return std::abs(p); },
                                          [](double p) { return p >= 0 ? 1.0 : -1.0; }, 2.0);
    try {
        legendre(lin, 2.0);
        FAIL("expected LegendreError");
    } catch (const LegendreError& e) {
        CHECK(e.w == 2.0);
    }
}

TEST_CASE("perspective case split")
{
    Lagrangian L(Hamiltonian::quadratic());
    CHECK(perspective(L, 0.0, 0.0) == 0.0);
    CHECK(std::isinf(perspective(L, 1.0, 0.0)));
    CHECK(perspective(L, 2.0, 4.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(perspective(L, 1.0, -0.1), DomainError);
}

TEST_CASE("perspective partials")
{
    Lagrangian L(Hamiltonian::quadratic());
    auto p = perspective_partials(L, 2.0, 1.0);
    CHECK(p.dz == doctest::Approx(2.0));
    CHECK(p.dy == doctest::Approx(-2.0));
    const double h = 1e-6;
    CHECK((perspective(L, 2 + h, 1) - perspective(L, 2 - h, 1)) / (2 * h) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK((perspective(L, 2, 1 + h) - perspective(L, 2, 1 - h)) / (2 * h) == doctest::Approx(-2.0).epsilon(1e-6));

    Lagrangian Lp(Hamiltonian::power(2.0));
    auto p0 = perspective_partials(Lp, 0.0, 2.0);
    CHECK(p0.dz == 0.0);
    CHECK(p0.dy == doctest::Approx(Lp(0.0)));
    CHECK_THROWS_AS(perspective_partials(L, 1.0, 0.0), DomainError);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> Z(-3, 3), Y(0.2, 5);
    for (double alpha : {2.0, 1.6}) {
        Lagrangian La(alpha == 2.0 ? Hamiltonian::quadratic() : Hamiltonian::power(alpha));
        for (int k = 0; k < 50; ++k) {
            double z = Z(rng), y = Y(rng);
            auto pp = perspective_partials(La, z, y);
            double fz = (perspective(La, z + h, y) - perspective(La, z - h, y)) / (2 * h);
            double fy = (perspective(La, z, y + h) - perspective(La, z, y - h)) / (2 * h);
            CHECK(pp.dz == doctest::Approx(fz).epsilon(1e-6).scale(1.0));
            CHECK(pp.dy == doctest::Approx(fy).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("L1 and L2 identities")
{
    Lagrangian L(Hamiltonian::quadratic());
    CHECK(L1(L, 0, 0, 0) == 0.0);
    CHECK(L2(L, 1.0, -1.0, 3.0, 0.0) == doctest::Approx(L(0.0) * 3.0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-2, 2), Y(0, 3);
    for (int k = 0; k < 100; ++k) {
        double q = U(rng), z = U(rng), y = Y(rng);
        CHECK(L2(L, q, z, y, 0.0) == L1(L, q, z, y));
    }
}

TEST_CASE("perspective is jointly convex (sampled)")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> Z(-10, 10), Y(0, 10), T(0, 1);
    for (int which = 0; which < 2; ++which) {
        Lagrangian L(which == 0 ? Hamiltonian::quadratic() : Hamiltonian::power(1.5));
        int n = which == 0 ? 10000 : 2000;
        double worst = 0;
        for (int k = 0; k < n; ++k) {
            double z1 = Z(rng), y1 = Y(rng), z2 = Z(rng), y2 = Y(rng), t = T(rng);
            double lhs = perspective(L, t * z1 + (1 - t) * z2, t * y1 + (1 - t) * y2);
            double rhs = t * perspective(L, z1, y1) + (1 - t) * perspective(L, z2, y2);
            worst = std::min(worst, (rhs - lhs) / std::max(1.0, std::abs(rhs)));
        }
        CHECK(worst >= -1e-10);
    }
}

TEST_CASE("lower semicontinuity probe at y = 0")
{
    Lagrangian L(Hamiltonian::quadratic());
    double prev = 0;
    for (double y = 1e-1; y > 1e-12; y *= 0.1) {
        double v = perspective(L, 1.0, y);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(prev > 1e10);
}

TEST_CASE("coupling derivative matches finite differences")
{
    for (const Coupling& c : {Coupling::quadratic(), Coupling::power(3.0), Coupling::power(1.5)}) {
        for (double z : {0.1, 0.5, 1.0, 2.5}) {
            double h = 1e-6 * z;
            double fd = (c.G(z + h) - c.G(z - h)) / (2 * h);
            CHECK(fd == doctest::Approx(c.g(z)).epsilon(1e-6));
        }
    }
}
