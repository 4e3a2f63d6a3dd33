#include "mfgp/kernels.hpp"

#include <cmath>
#include <limits>

namespace mfgp::kernels::serial {

void dx_periodic(std::span<const double> in, std::span<double> out, int nt, int nx, double dx)
{
    const double s = 0.5 / dx;
    for (int n = 0; n < nt; ++n) {
        const double* f = in.data() + static_cast<std::size_t>(n) * nx;
        double* o = out.data() + static_cast<std::size_t>(n) * nx;
        for (int j = 0; j < nx; ++j) {
            int jp = j + 1 == nx ? 0 : j + 1;
            int jm = j == 0 ? nx - 1 : j - 1;
            o[j] = (f[jp] - f[jm]) * s;
        }
    }
}

void dxx_periodic(std::span<const double> in, std::span<double> out, int nt, int nx, double dx)
{
    const double s = 1.0 / (dx * dx);
    for (int n = 0; n < nt; ++n) {
        const double* f = in.data() + static_cast<std::size_t>(n) * nx;
        double* o = out.data() + static_cast<std::size_t>(n) * nx;
        for (int j = 0; j < nx; ++j) {
            int jp = j + 1 == nx ? 0 : j + 1;
            int jm = j == 0 ? nx - 1 : j - 1;
            o[j] = (f[jp] - 2.0 * f[j] + f[jm]) * s;
        }
    }
}

void dt_interior(std::span<const double> in, std::span<double> out, int nt, int nx, double dt)
{
    for (int n = 0; n < nt; ++n) {
        int a = n == 0 ? 0 : n - 1;
        int b = n == nt - 1 ? nt - 1 : n + 1;
        double s = 1.0 / ((b - a) * dt);
        for (int j = 0; j < nx; ++j)
            out[static_cast<std::size_t>(n) * nx + j] =
                (in[static_cast<std::size_t>(b) * nx + j] - in[static_cast<std::size_t>(a) * nx + j]) * s;
    }
}

// out = D^T in. Row n of D reads rows a(n), b(n) with coefficients -s(n), +s(n).
void dt_transpose(std::span<const double> in, std::span<double> out, int nt, int nx, double dt)
{
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
    for (int n = 0; n < nt; ++n) {
        int a = n == 0 ? 0 : n - 1;
        int b = n == nt - 1 ? nt - 1 : n + 1;
        double s = 1.0 / ((b - a) * dt);
        for (int j = 0; j < nx; ++j) {
            double g = in[static_cast<std::size_t>(n) * nx + j] * s;
            out[static_cast<std::size_t>(b) * nx + j] += g;
            out[static_cast<std::size_t>(a) * nx + j] -= g;
        }
    }
}

void row_sums(std::span<const double> in, std::span<double> sums, int nt, int nx)
{
    for (int n = 0; n < nt; ++n) {
        double s = 0.0;
        for (int j = 0; j < nx; ++j) s += in[static_cast<std::size_t>(n) * nx + j];
        sums[n] = s;
    }
}

void planning_pointwise(const PointwiseModel& model, const PlanningPass& p, int nt, int nx)
{
    const double inf = std::numeric_limits<double>::infinity();
    const bool grad = !p.pz.empty();
    for (int n = 0; n < nt; ++n) {
        for (int j = 0; j < nx; ++j) {
            std::size_t i = static_cast<std::size_t>(n) * nx + j;
            double z = p.z[i], m = p.m[i];
            double l0;
            if (m > 0.0) {
                double w = z / m;
                double L = model.L(w);
                l0 = m * L;
                if (grad) {
                    double d = model.dL(w);
                    p.pz[i] = d;
                    p.cm[i] = L - w * d - p.V[j] + model.g(m);
                }
            } else if (m == 0.0 && z == 0.0) {
                l0 = 0.0;
                if (grad) {
                    p.pz[i] = std::numeric_limits<double>::quiet_NaN();
                    p.cm[i] = std::numeric_limits<double>::quiet_NaN();
                }
            } else {
                l0 = inf;
                if (grad) {
                    p.pz[i] = std::numeric_limits<double>::quiet_NaN();
                    p.cm[i] = std::numeric_limits<double>::quiet_NaN();
                }
            }
            p.integrand[i] = l0 == inf ? inf : l0 - p.V[j] * (m - 1.0) + model.G(m);
        }
    }
}

void congestion_quotients(const Quotients& q, double alpha, double mu)
{
    for (std::size_t i = 0; i < q.z.size(); ++i) {
        double z = q.z[i], m = q.m[i];
        double ma2 = std::pow(m, alpha - 2.0);
        q.b[i] = z * z * ma2;
        q.a[i] = z * ma2 * m;
        q.c[i] = std::pow(m, mu);
    }
}

void hopf_lax_scan(std::span<const HopfLaxScan> scans, std::span<int> best, std::span<double> best_value)
{
    for (std::size_t s = 0; s < scans.size(); ++s) {
        const HopfLaxScan& sc = scans[s];
        int kb = 0;
        double vb = std::numeric_limits<double>::infinity();
        for (int k = -sc.half_width; k <= sc.half_width; ++k) {
            double v = sc.value(sc.x + k * sc.h);
            if (v < vb) {
                vb = v;
                kb = k;
            }
        }
        best[s] = kb;
        best_value[s] = vb;
    }
}

}  // namespace mfgp::kernels::serial
