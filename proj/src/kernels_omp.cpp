#include "mfgp/kernels.hpp"

#include <cmath>
#include <limits>

namespace mfgp::kernels::omp {

void dx_periodic(std::span<const double> in, std::span<double> out, int nt, int nx, double dx)
{
    const double s = 0.5 / dx;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < nt; ++n) {
        const double* f = in.data() + static_cast<std::size_t>(n) * nx;
        double* o = out.data() + static_cast<std::size_t>(n) * nx;
        o[0] = (f[1] - f[nx - 1]) * s;
        for (int j = 1; j < nx - 1; ++j) o[j] = (f[j + 1] - f[j - 1]) * s;
        o[nx - 1] = (f[0] - f[nx - 2]) * s;
    }
}

void dxx_periodic(std::span<const double> in, std::span<double> out, int nt, int nx, double dx)
{
    const double s = 1.0 / (dx * dx);
#pragma omp parallel for schedule(static)
    for (int n = 0; n < nt; ++n) {
        const double* f = in.data() + static_cast<std::size_t>(n) * nx;
        double* o = out.data() + static_cast<std::size_t>(n) * nx;
        o[0] = (f[1] - 2.0 * f[0] + f[nx - 1]) * s;
        for (int j = 1; j < nx - 1; ++j) o[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) * s;
        o[nx - 1] = (f[0] - 2.0 * f[nx - 1] + f[nx - 2]) * s;
    }
}

void dt_interior(std::span<const double> in, std::span<double> out, int nt, int nx, double dt)
{
#pragma omp parallel for schedule(static)
    for (int n = 0; n < nt; ++n) {
        int a = n == 0 ? 0 : n - 1;
        int b = n == nt - 1 ? nt - 1 : n + 1;
        double s = 1.0 / ((b - a) * dt);
        const double* fa = in.data() + static_cast<std::size_t>(a) * nx;
        const double* fb = in.data() + static_cast<std::size_t>(b) * nx;
        double* o = out.data() + static_cast<std::size_t>(n) * nx;
        for (int j = 0; j < nx; ++j) o[j] = (fb[j] - fa[j]) * s;
    }
}

// Gather form of the transpose; contributions are added in increasing source
// row order so the result matches the serial scatter loop bit for bit.
void dt_transpose(std::span<const double> in, std::span<double> out, int nt, int nx, double dt)
{
#pragma omp parallel for schedule(static)
    for (int r = 0; r < nt; ++r) {
        double* o = out.data() + static_cast<std::size_t>(r) * nx;
        for (int j = 0; j < nx; ++j) o[j] = 0.0;
        for (int n = r - 1; n <= r + 1; ++n) {
            if (n < 0 || n >= nt) continue;
            int a = n == 0 ? 0 : n - 1;
            int b = n == nt - 1 ? nt - 1 : n + 1;
            if (a != r && b != r) continue;
            double s = 1.0 / ((b - a) * dt);
            const double* f = in.data() + static_cast<std::size_t>(n) * nx;
            for (int j = 0; j < nx; ++j) {
                double g = f[j] * s;
                if (b == r) o[j] += g;
                if (a == r) o[j] -= g;
            }
        }
    }
}

void row_sums(std::span<const double> in, std::span<double> sums, int nt, int nx)
{
#pragma omp parallel for schedule(static)
    for (int n = 0; n < nt; ++n) {
        const double* f = in.data() + static_cast<std::size_t>(n) * nx;
        double s = 0.0;
        for (int j = 0; j < nx; ++j) s += f[j];
        sums[n] = s;
    }
}

void planning_pointwise(const PointwiseModel& model, const PlanningPass& p, int nt, int nx)
{
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const bool grad = !p.pz.empty();
    const long total = static_cast<long>(nt) * nx;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < total; ++i) {
        int j = static_cast<int>(i % nx);
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
        } else {
            l0 = (m == 0.0 && z == 0.0) ? 0.0 : inf;
            if (grad) {
                p.pz[i] = nan;
                p.cm[i] = nan;
            }
        }
        p.integrand[i] = l0 == inf ? inf : l0 - p.V[j] * (m - 1.0) + model.G(m);
    }
}

void congestion_quotients(const Quotients& q, double alpha, double mu)
{
    const long total = static_cast<long>(q.z.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < total; ++i) {
        double z = q.z[i], m = q.m[i];
        double ma2 = std::pow(m, alpha - 2.0);
        q.b[i] = z * z * ma2;
        q.a[i] = z * ma2 * m;
        q.c[i] = std::pow(m, mu);
    }
}

void hopf_lax_scan(std::span<const HopfLaxScan> scans, std::span<int> best, std::span<double> best_value)
{
    const long total = static_cast<long>(scans.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long s = 0; s < total; ++s) {
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

}  // namespace mfgp::kernels::omp
