#include "mfgp/hughes.hpp"

#include "mfgp/error.hpp"
#include "mfgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mfgp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double sign(const HughesSpec& s) { return s.branch == Branch::increasing ? 1.0 : -1.0; }

// convex Legendre transform of -p f(p)
double lagrangian_increasing(const HughesSpec& s, double w)
{
    if (s.law == SpeedLaw::linear) return 0.25 * (w + 1.0) * (w + 1.0);
    if (w >= 0.0) return inf;
    double k = s.k1 * std::pow(s.k2, -s.beta);
    double p = std::pow(k * (1.0 - s.beta) / (-w), 1.0 / s.beta);
    return p * (-w) * s.beta / (1.0 - s.beta);
}

struct Context {
    const HughesSpec& spec;
    std::vector<double> cum;
    double margin_for(double t) const
    {
        if (spec.search_margin >= 0.0) return spec.search_margin;
        return t * spec.max_speed() + 4.0 * spec.h();
    }
    // objective to minimise; +inf outside the window
    double objective(double t, double x, double y) const
    {
        if (y < spec.x_min || y > spec.x_max) return inf;
        double l = spec.lagrangian((x - y) / t);
        return sign(spec) * (t * l + initial_potential(spec, cum, y));
    }
    kernels::HopfLaxScan scan(double t, double x) const
    {
        double h = spec.h();
        int half = static_cast<int>(std::ceil(margin_for(t) / h));
        return {[this, t, x](double y) { return objective(t, x, y); }, x, h, half};
    }
    HopfLaxValue refine(double t, double x, int k, double best, int half) const;
};

HopfLaxValue Context::refine(double t, double x, int k, double best, int half) const
{
    const double h = spec.h();
    double yk = x + k * h;
    if (!std::isfinite(best)) throw WindowTooSmallError("hopf_lax: no finite candidate in the search window");
    bool lo_out = yk - h < spec.x_min - 1e-12 * h, hi_out = yk + h > spec.x_max + 1e-12 * h;
    if (lo_out || hi_out || std::abs(k) == half) {
        std::ostringstream os;
        os << "hopf_lax: optimum at the edge of the search window (t = " << t << ", x = " << x << ", y = " << yk
           << "); enlarge the window";
        throw WindowTooSmallError(os.str());
    }
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = yk - h, b = yk + h;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = objective(t, x, c), fd = objective(t, x, d);
    for (int i = 0; i < spec.refine_iters && b - a > 1e-15 * std::max(1.0, std::abs(x)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(t, x, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(t, x, d);
        }
    }
    HopfLaxValue r{best, yk};
    if (fc < r.value) r = {fc, c};
    if (fd < r.value) r = {fd, d};
    r.value *= sign(spec);
    return r;
}

}  // namespace

double HughesSpec::h() const { return (x_max - x_min) / static_cast<double>(rho0.size() - 1); }

double HughesSpec::x(int j) const { return x_min + j * h(); }

double HughesSpec::speed(double rho) const
{
    if (law == SpeedLaw::linear) return 1.0 - rho;
    return k1 / std::pow(k2 * rho, beta);
}

double HughesSpec::hamiltonian(double p) const
{
    return branch == Branch::increasing ? -p * speed(p) : p * speed(p);
}

double HughesSpec::lagrangian(double w) const
{
    return branch == Branch::increasing ? lagrangian_increasing(*this, w) : -lagrangian_increasing(*this, -w);
}

double HughesSpec::max_speed() const
{
    auto [lo, hi] = std::minmax_element(rho0.begin(), rho0.end());
    if (law == SpeedLaw::linear) return std::max(std::abs(2.0 * *lo - 1.0), std::abs(2.0 * *hi - 1.0));
    double k = k1 * std::pow(k2, -beta);
    return k * (1.0 - beta) * std::pow(*lo, -beta);
}

void validate_spec(const HughesSpec& s)
{
    if (s.rho0.size() < 3) throw ShapeError("hughes: rho0 needs at least 3 samples");
    if (!(s.x_max > s.x_min)) throw DomainError("hughes: x_max must exceed x_min");
    if (s.nt < 2) throw DomainError("hughes: nt must be >= 2");
    if (!(s.t_final > 0.0)) throw DomainError("hughes: t_final must be positive");
    for (double r : s.rho0) {
        if (!(r >= 0.0)) throw DomainError("hughes: rho0 must be nonnegative");
        if (s.law == SpeedLaw::linear && r > 1.0) throw DomainError("hughes: rho0 must not exceed 1 for f = 1 - rho");
        if (s.law == SpeedLaw::congestion && !(r > 0.0))
            throw DomainError("hughes: rho0 must be positive for the congestion speed law");
    }
    if (s.law == SpeedLaw::congestion) {
        if (!(s.beta > 0.0 && s.beta < 0.5)) throw DomainError("hughes: beta must lie in (0, 1/2)");
        if (!(s.k1 > 0.0 && s.k2 > 0.0)) throw DomainError("hughes: k1, k2 must be positive");
    }
    for (std::size_t j = 1; j < s.rho0.size(); ++j) {
        double d = s.rho0[j] - s.rho0[j - 1];
        if (s.branch == Branch::increasing && d < 0.0)
            throw DomainError("hughes: branch 'increasing' needs nondecreasing rho0");
        if (s.branch == Branch::decreasing && d > 0.0)
            throw DomainError("hughes: branch 'decreasing' needs nonincreasing rho0");
    }
}

std::vector<double> cumulative_potential(const HughesSpec& spec)
{
    const double h = spec.h();
    std::vector<double> c(spec.rho0.size(), 0.0);
    for (std::size_t j = 1; j < c.size(); ++j) c[j] = c[j - 1] + 0.5 * h * (spec.rho0[j - 1] + spec.rho0[j]);
    return c;
}

double initial_potential(const HughesSpec& spec, const std::vector<double>& cum, double y)
{
    const int n = static_cast<int>(spec.rho0.size());
    const double h = spec.h();
    if (y <= spec.x_min) return spec.rho0.front() * (y - spec.x_min);
    if (y >= spec.x_max) return cum.back() + spec.rho0.back() * (y - spec.x_max);
    int j = std::min(static_cast<int>((y - spec.x_min) / h), n - 2);
    double s = y - spec.x(j);
    return cum[j] + spec.rho0[j] * s + 0.5 * (spec.rho0[j + 1] - spec.rho0[j]) * s * s / h;
}

HopfLaxValue hopf_lax(const HughesSpec& spec, double t, double x)
{
    if (!(t > 0.0)) throw DomainError("hopf_lax: t must be positive");
    validate_spec(spec);
    Context ctx{spec, cumulative_potential(spec)};
    kernels::HopfLaxScan sc = ctx.scan(t, x);
    int k = 0;
    double v = inf;
    kernels::omp::hopf_lax_scan({&sc, 1}, {&k, 1}, {&v, 1});
    return ctx.refine(t, x, k, v, sc.half_width);
}

HughesSolution solve_hughes(const HughesSpec& spec)
{
    validate_spec(spec);
    Context ctx{spec, cumulative_potential(spec)};
    const double h = spec.h(), cone = spec.t_final * spec.max_speed();
    HughesSolution sol;
    for (int n = 0; n < spec.nt; ++n) sol.t.push_back(spec.t_final * n / (spec.nt - 1));
    std::vector<int> cols;
    for (int j = 0; j < static_cast<int>(spec.rho0.size()); ++j) {
        double x = spec.x(j);
        if (x - cone >= spec.x_min + 2.0 * h && x + cone <= spec.x_max - 2.0 * h) {
            cols.push_back(j);
            sol.x.push_back(x);
        }
    }
    if (cols.size() < 3) throw WindowTooSmallError("solve_hughes: window too small for t_final");
    const std::size_t nx = cols.size(), nt = sol.t.size();
    sol.phi.assign(nt * nx, 0.0);
    sol.rho.assign(nt * nx, 0.0);
    sol.argmin.assign(nt * nx, 0.0);
    for (std::size_t j = 0; j < nx; ++j) {
        sol.phi[j] = ctx.cum[cols[j]];
        sol.argmin[j] = sol.x[j];
    }

    std::vector<kernels::HopfLaxScan> scans;
    for (std::size_t n = 1; n < nt; ++n)
        for (std::size_t j = 0; j < nx; ++j) scans.push_back(ctx.scan(sol.t[n], sol.x[j]));
    std::vector<int> best(scans.size());
    std::vector<double> value(scans.size());
    kernels::omp::hopf_lax_scan(scans, best, value);
    for (std::size_t i = 0; i < scans.size(); ++i) {
        std::size_t n = 1 + i / nx, j = i % nx;
        HopfLaxValue r = ctx.refine(sol.t[n], sol.x[j], best[i], value[i], scans[i].half_width);
        sol.phi[n * nx + j] = r.value;
        sol.argmin[n * nx + j] = r.argmin;
    }

    for (std::size_t n = 0; n < nt; ++n)
        for (std::size_t j = 0; j < nx; ++j) {
            std::size_t a = j == 0 ? 0 : j - 1, b = j == nx - 1 ? j : j + 1;
            sol.rho[n * nx + j] = (sol.phi[n * nx + b] - sol.phi[n * nx + a]) / ((b - a) * h);
        }
    const double dt = spec.t_final / (spec.nt - 1);
    for (std::size_t n = 1; n + 1 < nt; ++n)
        for (std::size_t j = 1; j + 1 < nx; ++j) {
            double phit = (sol.phi[(n + 1) * nx + j] - sol.phi[(n - 1) * nx + j]) / (2.0 * dt);
            double r = sol.rho[n * nx + j];
            double res = phit + spec.hamiltonian(r);
            sol.eikonal_residual = std::max(sol.eikonal_residual, std::abs(res));
        }
    return sol;
}

}  // namespace mfgp
