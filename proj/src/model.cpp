#include "mfgp/model.hpp"

#include "mfgp/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace mfgp {

Hamiltonian Hamiltonian::quadratic()
{
    Hamiltonian H;
    H.kind_ = Kind::quadratic;
    H.name_ = "quadratic";
    H.alpha_ = 2.0;
    H.beta_ = 2.0;
    H.h_ = [](double p) { return 0.5 * p * p; };
    H.dh_ = [](double p) { return p; };
    return H;
}

Hamiltonian Hamiltonian::power(double alpha)
{
    if (!(alpha > 1.0) || !std::isfinite(alpha))
        throw DomainError("power Hamiltonian: alpha must be > 1");
    Hamiltonian H;
    H.kind_ = Kind::power;
    H.name_ = "power";
    H.alpha_ = alpha;
    H.beta_ = alpha / (alpha - 1.0);
    H.h_ = [alpha](double p) { return std::pow(1.0 + p * p, 0.5 * alpha); };
    H.dh_ = [alpha](double p) { return alpha * p * std::pow(1.0 + p * p, 0.5 * alpha - 1.0); };
    return H;
}

Hamiltonian Hamiltonian::custom(std::string name, std::function<double(double)> h,
                                std::function<double(double)> dh, double beta)
{
    Hamiltonian H;
    H.kind_ = Kind::custom;
    H.name_ = std::move(name);
    H.beta_ = beta;
    H.h_ = std::move(h);
    H.dh_ = std::move(dh);
    return H;
}

LegendreResult legendre(const Hamiltonian& H, double w)
{
    if (!std::isfinite(w)) throw LegendreError("legendre: non-finite argument", w);
    auto fail = [w](const char* why) {
        std::ostringstream os;
        os << "legendre: " << why << " at w = " << w;
        return LegendreError(os.str(), w);
    };

    // bracket the root of H'(p) = w (H' is increasing)
    double lo = -1.0, hi = 1.0;
    int it = 0;
    while (H.derivative(hi) < w) {
        lo = hi;
        hi *= 2.0;
        if (++it > 400 || !std::isfinite(hi)) throw fail("no bracket (H not superlinear?)");
    }
    while (H.derivative(lo) > w) {
        hi = lo;
        lo *= 2.0;
        if (++it > 400 || !std::isfinite(lo)) throw fail("no bracket (H not superlinear?)");
    }

    double p = 0.5 * (lo + hi);
    int k = 0;
    for (; k < 300; ++k) {
        double r = H.derivative(p) - w;
        if (r == 0.0) break;
        if (r > 0.0)
            hi = p;
        else
            lo = p;
        if (hi - lo <= 4e-16 * (1.0 + std::abs(p))) break;
        double hstep = 1e-6 * (1.0 + std::abs(p));
        double d2 = (H.derivative(p + hstep) - H.derivative(p - hstep)) / (2.0 * hstep);
        double pn = d2 > 0.0 ? p - r / d2 : 0.5 * (lo + hi);
        if (!(pn > lo && pn < hi)) pn = 0.5 * (lo + hi);
        if (std::abs(pn - p) <= 1e-15 * (1.0 + std::abs(p))) {
            p = pn;
            break;
        }
        p = pn;
    }
    if (k >= 300) throw fail("no convergence");
    return {p * w - H(p), p, k};
}

Lagrangian::Lagrangian(Hamiltonian H) : H_(std::move(H)) {}

double Lagrangian::operator()(double w) const
{
    if (H_.kind() == Hamiltonian::Kind::quadratic) return 0.5 * w * w;
    if (H_.kind() == Hamiltonian::Kind::power && H_.alpha() == 2.0) return 0.25 * w * w - 1.0;
    return legendre(H_, w).value;
}

double Lagrangian::derivative(double w) const
{
    if (H_.kind() == Hamiltonian::Kind::quadratic) return w;
    if (H_.kind() == Hamiltonian::Kind::power && H_.alpha() == 2.0) return 0.5 * w;
    return legendre(H_, w).argmax;
}

double perspective(const Lagrangian& L, double z, double y)
{
    if (y < 0.0 || std::isnan(y)) throw DomainError("perspective: negative density");
    if (y == 0.0) return z == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return y * L(z / y);
}

PerspectivePartials perspective_partials(const Lagrangian& L, double z, double y)
{
    if (!(y > 0.0)) throw DomainError("perspective_partials: density must be positive");
    double w = z / y;
    double d = L.derivative(w);
    return {d, L(w) - w * d};
}

double L1(const Lagrangian& L, double q, double z, double y)
{
    return perspective(L, z + q, y);
}

double L2(const Lagrangian& L, double q, double z, double y, double theta)
{
    return perspective(L, z + q - theta, y);
}

Coupling Coupling::quadratic()
{
    Coupling c;
    c.name_ = "quadratic";
    c.C_ = 0.5;
    c.gamma_ = 2.0;
    c.G_ = [](double z) { return 0.5 * z * z; };
    c.g_ = [](double z) { return z; };
    return c;
}

Coupling Coupling::power(double gamma)
{
    if (!(gamma > 1.0) || !std::isfinite(gamma)) throw DomainError("power coupling: gamma must be > 1");
    Coupling c;
    c.name_ = "power";
    c.C_ = 1.0 / gamma;
    c.gamma_ = gamma;
    c.G_ = [gamma](double z) { return std::pow(std::abs(z), gamma) / gamma; };
    c.g_ = [gamma](double z) { return std::copysign(std::pow(std::abs(z), gamma - 1.0), z); };
    return c;
}

// Not strictly convex and without superlinear growth; kept so validation has
// something to reject.
Coupling Coupling::linear()
{
    Coupling c;
    c.name_ = "linear";
    c.C_ = 1.0;
    c.gamma_ = 1.0;
    c.G_ = [](double z) { return z; };
    c.g_ = [](double) { return 1.0; };
    return c;
}

Coupling Coupling::custom(std::string name, std::function<double(double)> G,
                          std::function<double(double)> g, double growth_C, double gamma)
{
    Coupling c;
    c.name_ = std::move(name);
    c.C_ = growth_C;
    c.gamma_ = gamma;
    c.G_ = std::move(G);
    c.g_ = std::move(g);
    return c;
}

}  // namespace mfgp
