#pragma once

#include <functional>
#include <span>

namespace mfgp::kernels {

// Row-major nt x nx arrays. The serial and omp namespaces expose the same
// functions; omp results are bitwise equal to serial ones.

struct PointwiseModel {
    // perspective integrand L0(z,m) and its partials; coupling G and g
    std::function<double(double)> L, dL, G, g;
};

struct PlanningPass {
    std::span<const double> z, m, V;  // V has nx entries
    std::span<double> integrand;      // per node, +inf if outside the domain
    std::span<double> pz, cm;         // may be empty when no gradient is wanted
};

struct Quotients {
    std::span<const double> z, m;
    std::span<double> a, b, c;
};

struct HopfLaxScan {
    // value(y) returns the objective to minimise at lattice point y
    std::function<double(double)> value;
    double x, h;
    int half_width;  // lattice y_k = x + k h, k in [-half_width, half_width]
};

#define MFGP_KERNEL_DECLS                                                                     \
    void dx_periodic(std::span<const double> in, std::span<double> out, int nt, int nx, double dx);  \
    void dxx_periodic(std::span<const double> in, std::span<double> out, int nt, int nx, double dx); \
    void dt_interior(std::span<const double> in, std::span<double> out, int nt, int nx, double dt);  \
    void dt_transpose(std::span<const double> in, std::span<double> out, int nt, int nx, double dt); \
    void row_sums(std::span<const double> in, std::span<double> sums, int nt, int nx);              \
    void planning_pointwise(const PointwiseModel& model, const PlanningPass& pass, int nt, int nx);  \
    void congestion_quotients(const Quotients& q, double alpha, double mu);                          \
    void hopf_lax_scan(std::span<const HopfLaxScan> scans, std::span<int> best, std::span<double> best_value);

namespace serial {
MFGP_KERNEL_DECLS
}
namespace omp {
MFGP_KERNEL_DECLS
}

#undef MFGP_KERNEL_DECLS

}  // namespace mfgp::kernels
