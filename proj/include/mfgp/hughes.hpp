#pragma once

#include <vector>

namespace mfgp {

enum class SpeedLaw { linear, congestion };  // f = 1 - rho, f = k1 / (k2 rho)^beta
enum class Branch { increasing, decreasing };

struct HughesSpec {
    double x_min = -1.0, x_max = 1.0;
    std::vector<double> rho0;  // samples at x_min + j h, h = (x_max - x_min) / (n - 1)
    SpeedLaw law = SpeedLaw::linear;
    double k1 = 1.0, k2 = 1.0, beta = 0.25;
    Branch branch = Branch::increasing;
    double t_final = 0.5;
    int nt = 11;                  // time lattice 0, t_final / (nt - 1), ..., t_final
    double search_margin = -1.0;  // negative: t * max speed + 4 h
    int refine_iters = 80;

    double h() const;
    double x(int j) const;
    double speed(double rho) const;
    // Hamiltonian of the selected branch: -p f(p) (increasing), p f(p) (decreasing)
    double hamiltonian(double p) const;
    // its Legendre transform; convex (increasing) or concave (decreasing), may be +-inf
    double lagrangian(double w) const;
    // bound on |H'| over the range of rho0
    double max_speed() const;
};

void validate_spec(const HughesSpec& spec);

// Cumulative trapezoid of rho0 from x_min.
std::vector<double> cumulative_potential(const HughesSpec& spec);
// Exact integral of the piecewise linear interpolant of rho0 (constant outside the window).
double initial_potential(const HughesSpec& spec, const std::vector<double>& cum, double y);

struct HopfLaxValue {
    double value;
    double argmin;  // y* (argmax on the decreasing branch)
};

HopfLaxValue hopf_lax(const HughesSpec& spec, double t, double x);

struct HughesSolution {
    std::vector<double> t, x;               // x: window nodes whose cone of dependence stays inside
    std::vector<double> phi, rho, argmin;   // row-major t.size() x x.size()
    double eikonal_residual = 0.0;          // interior sup |phi_t -+ rho f(rho)|

    double at(const std::vector<double>& f, int n, int j) const { return f[n * x.size() + j]; }
};

HughesSolution solve_hughes(const HughesSpec& spec);

}  // namespace mfgp
