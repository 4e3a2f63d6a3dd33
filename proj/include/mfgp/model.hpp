#pragma once

#include <functional>
#include <string>

namespace mfgp {

class Hamiltonian {
public:
    enum class Kind { quadratic, power, custom };

    static Hamiltonian quadratic();
    // (1+p^2)^{alpha/2}, alpha > 1
    static Hamiltonian power(double alpha);
    // beta: growth exponent claimed for the Lagrangian
    static Hamiltonian custom(std::string name, std::function<double(double)> h,
                              std::function<double(double)> dh, double beta);

    double operator()(double p) const { return h_(p); }
    double derivative(double p) const { return dh_(p); }
    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double alpha() const { return alpha_; }
    double growth_exponent() const { return beta_; }

private:
    Hamiltonian() = default;
    Kind kind_ = Kind::quadratic;
    std::string name_;
    double alpha_ = 2.0, beta_ = 2.0;
    std::function<double(double)> h_, dh_;
};

struct LegendreResult {
    double value;   // L(w) = sup_p (p w - H(p))
    double argmax;  // p*, equal to L'(w)
    int iterations;
};

// Numeric Legendre transform: bracket expansion on H'(p) - w then safeguarded
// Newton/bisection. Throws LegendreError carrying w if no bracket is found.
LegendreResult legendre(const Hamiltonian& H, double w);

class Lagrangian {
public:
    explicit Lagrangian(Hamiltonian H);
    double operator()(double w) const;
    double derivative(double w) const;
    const Hamiltonian& hamiltonian() const { return H_; }

private:
    Hamiltonian H_;
};

// L0(z,y) = y L(z/y) for y > 0, 0 at (0,0), +inf for y = 0, z != 0.
// Throws DomainError for y < 0.
double perspective(const Lagrangian& L, double z, double y);

struct PerspectivePartials {
    double dz, dy;
};
// Requires y > 0. dz = L'(z/y), dy = L(z/y) - (z/y) L'(z/y).
PerspectivePartials perspective_partials(const Lagrangian& L, double z, double y);

// L1(q,z,y) = L0(z+q, y), L2(q,z,y,theta) = L0(z+q-theta, y)
double L1(const Lagrangian& L, double q, double z, double y);
double L2(const Lagrangian& L, double q, double z, double y, double theta);

class Coupling {
public:
    static Coupling quadratic();
    static Coupling power(double gamma);
    static Coupling linear();
    static Coupling custom(std::string name, std::function<double(double)> G,
                           std::function<double(double)> g, double growth_C, double gamma);

    double G(double z) const { return G_(z); }
    double g(double z) const { return g_(z); }
    const std::string& name() const { return name_; }
    double growth_C() const { return C_; }
    double gamma() const { return gamma_; }

private:
    Coupling() = default;
    std::string name_;
    double C_ = 0.5, gamma_ = 2.0;
    std::function<double(double)> G_, g_;
};

}  // namespace mfgp
