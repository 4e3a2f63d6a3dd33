#pragma once

#include "mfgp/grid.hpp"
#include "mfgp/planning.hpp"
#include "mfgp/recovery.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mfgp {

enum class OuterMethod { newton, picard };

struct CongestionSpec {
    Grid grid;
    double alpha = 0.5;
    double mu = 1.0;
    Slice m0, mT;
    std::vector<double> eps_schedule;  // decreasing; empty means default_schedule
    double eps_min = 1e-4;             // default schedule: min(k0, 0.1) down to eps_min
    double eps_factor = 0.5;
    double damping = 0.5;              // Picard relaxation rho in (0,1]
    OuterMethod method = OuterMethod::newton;
    int max_outer = 200;               // per epsilon level
    double tol_fp = 1e-10;             // sup norm of S(pp) - pp
    int stagnation_window = 25;
    int inner_max_iters = 200;         // interior-point iterations, constrained case only
    double inner_tol = 1e-13;

    // integrability exponents (two variants); metadata only
    double kappa() const;
    double kappa_alt() const;
    double k0() const;
};

CongestionSpec congestion_sine_instance(int nt, int nx, double alpha = 0.5, double mu = 1.0, double amp = 0.1);
std::vector<double> default_schedule(const CongestionSpec& spec);
void validate_spec(const CongestionSpec& spec);
PotentialPair initial_guess(const CongestionSpec& spec);

enum class FloorMode { strict, floor };

struct OperatorImage {
    Field f1;       // zero on the pinned rows t = 0, T
    TimeSeries f2;
    int floored = 0;
};

// F1 = -a_t + (b/2)_x - c_x on interior rows (central differences, equal to the
// weighted adjoint form), F2 = int a dx; a = z m^{alpha-1}, b = z^2 m^{alpha-2},
// c = m^mu, z = phi_t + q, m = phi_x + 1. Nodes with m < floor throw (strict)
// or are evaluated at m = floor and counted.
OperatorImage apply_F(const CongestionSpec& spec, const PotentialPair& pp, double floor = 0.0,
                      FloorMode mode = FloorMode::strict);

// Directional derivative of (F1, F2) at pp along (dphi, dq), from the analytic
// sparse Jacobian used by the Newton outer step.
OperatorImage apply_F_derivative(const CongestionSpec& spec, const PotentialPair& pp, const Field& dphi,
                                 const TimeSeries& dq);

// <A(a) - A(b), a - b>; both pairs must share the pinned boundary rows.
double monotonicity_gap(const CongestionSpec& spec, const PotentialPair& a, const PotentialPair& b);

// Scalar form of the monotonicity inequality for one node: returns
// (a1-a2)(z1-z2) - (b1-b2)(m1-m2)/2, nonnegative for m1, m2 > 0.
double pointwise_certificate(double alpha, double z1, double m1, double z2, double m2);
// Same quantity in the rearranged sum-of-terms form.
double pointwise_certificate_expanded(double alpha, double z1, double m1, double z2, double m2);

// <A(test), test - cand>
double weak_pairing(const CongestionSpec& spec, const PotentialPair& test, const PotentialPair& cand);

struct CertificateResult {
    double min_pairing;
    int tests;
};
CertificateResult weak_certificate(const CongestionSpec& spec, const PotentialPair& cand, int tests,
                                   std::uint64_t seed);

struct InnerPhiResult {
    Field phi;
    double objective;    // I[phi]
    double reference;    // I at the linear interpolant
    bool constrained;    // density floor was active
    int iterations;
};

// I[phi] = eps/2 |phi|_K^2 + <F1(pp0), phi>_W over pinned, row-mean-free phi
double inner_phi_objective(const CongestionSpec& spec, double eps, const Field& f1, const Field& phi);
InnerPhiResult inner_phi_solve(const CongestionSpec& spec, double eps, const PotentialPair& pp0);
// same problem, with the constrained iteration started from `start`
InnerPhiResult inner_phi_solve(const CongestionSpec& spec, double eps, const PotentialPair& pp0,
                               const Field& start);
TimeSeries inner_q_solve(const CongestionSpec& spec, double eps, const PotentialPair& pp0);

struct Tridiagonal {
    std::vector<double> sub, diag, sup, rhs;
};
// eps (w q + Laplacian q / dt) = -w F2, Neumann ends
Tridiagonal assemble_q_system(const Grid& g, double eps, const TimeSeries& f2);
TimeSeries solve_tridiagonal(const Tridiagonal& sys);

// S(pp) = (phi*, q*)
PotentialPair fixed_point_map(const CongestionSpec& spec, double eps, const PotentialPair& pp);

struct OuterRecord {
    double eps;
    int iter;
    double residual;
    std::string step;
    double step_length;
};

struct LevelRecord {
    double eps;
    int iterations;
    double residual;
    bool converged;
    double reg_energy;   // eps (|phi|_K^2 + |q|_B^2)
    double moment;       // int int m^{mu+1}
    double kinetic;      // int int z^2 m^{alpha-1}
    double energy_lhs;   // left side of the discrete a-priori inequality
    double bound;        // its right side, evaluated at the interpolant
    double change;       // sup norm change from the previous level
};

struct CongestionReport {
    PotentialPair solution;
    std::vector<LevelRecord> levels;
    std::vector<OuterRecord> trace;
    bool converged = false;
    std::string message;
    double wall_seconds = 0.0;
};

CongestionReport solve_congestion(const CongestionSpec& spec);
CongestionReport solve_congestion(const CongestionSpec& spec, PotentialPair start);

// u_x = m^{alpha-1} z; residuals of -u_t + u_x^2/(2 m^alpha) = m^mu + c(t) and
// m_t - (u_x m^{1-alpha})_x = 0.
MFGSolution recover_congestion(const CongestionSpec& spec, const PotentialPair& pp);

}  // namespace mfgp
