#include "mfgp/planning.hpp"

#include "mfgp/error.hpp"
#include "mfgp/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace mfgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

kernels::PointwiseModel pointwise_model(const PlanningSpec& spec)
{
    Lagrangian L = spec.lagrangian();
    Coupling c = spec.coupling;
    return {[L](double w) { return L(w); }, [L](double w) { return L.derivative(w); },
            [c](double z) { return c.G(z); }, [c](double z) { return c.g(z); }};
}

void check_shape(const PlanningSpec& spec, const PotentialPair& pp)
{
    if (!(pp.phi.grid() == spec.grid)) throw ShapeError("potential pair: phi grid differs from spec grid");
    if (static_cast<int>(pp.q.size()) != spec.grid.nt()) throw ShapeError("potential pair: q length differs from nt");
}

// z = phi_t + q - lambda phi_xx, m = phi_x + 1
void flux_density(const PlanningSpec& spec, const PotentialPair& pp, Field& z, Field& m)
{
    const Grid& g = spec.grid;
    z = dt_interior(pp.phi);
    if (spec.order == 1) z -= dxx_periodic(pp.phi);
    for (int n = 0; n < g.nt(); ++n)
        for (double& v : z.row(n)) v += pp.q[n];
    m = dx_periodic(pp.phi);
    for (double& v : m.values()) v += 1.0;
}

void scale_rows_by_weight(Field& f)
{
    const Grid& g = f.grid();
    for (int n = 0; n < g.nt(); ++n) {
        double w = g.node_weight(n);
        for (double& v : f.row(n)) v *= w;
    }
}

double mass_defect(const Field& m)
{
    double d = 0.0;
    for (int n = 0; n < m.grid().nt(); ++n) d = std::max(d, std::abs(integrate_x(m, n) - 1.0));
    return d;
}

}  // namespace

double PlanningSpec::sigma() const
{
    double b = hamiltonian.growth_exponent(), c = coupling.gamma();
    return b * c / (b + c - 1.0);
}

PlanningSpec sine_instance(int nt, int nx, double amp, int order)
{
    Grid g(nt, nx, 1.0);
    PlanningSpec s{g};
    s.order = order;
    s.potential.assign(nx, 0.0);
    s.m0.resize(nx);
    s.mT.assign(nx, 1.0);
    for (int j = 0; j < nx; ++j) s.m0[j] = 1.0 + amp * std::sin(2.0 * std::numbers::pi * g.x(j));
    return s;
}

void validate_spec(const PlanningSpec& spec)
{
    const int nx = spec.grid.nx();
    auto check_density = [&](const Slice& m, const char* name) {
        if (static_cast<int>(m.size()) != nx)
            throw ShapeError(std::string(name) + ": expected " + std::to_string(nx) + " samples");
        for (int j = 0; j < nx; ++j)
            if (!(m[j] > 0.0)) {
                std::ostringstream os;
                os << name << ": density must be positive, got " << m[j] << " at x = " << spec.grid.x(j);
                throw DomainError(os.str());
            }
        double mass = 0.0;
        for (double v : m) mass += v;
        mass *= spec.grid.dx();
        if (std::abs(mass - 1.0) > 1e-8) {
            std::ostringstream os;
            os << name << ": density not normalised (integral " << mass << ")";
            throw DomainError(os.str());
        }
    };
    check_density(spec.m0, "m0");
    check_density(spec.mT, "mT");
    if (static_cast<int>(spec.potential.size()) != nx) throw ShapeError("potential: expected nx samples");
    if (spec.order != 0 && spec.order != 1) throw DomainError("order must be 0 or 1");
    const auto& o = spec.opt;
    double k0 = std::min(*std::min_element(spec.m0.begin(), spec.m0.end()),
                         *std::min_element(spec.mT.begin(), spec.mT.end()));
    if (o.delta_floor < 0.0 || o.delta_floor >= k0) throw DomainError("delta_floor must lie in [0, k0)");
    if (!(o.tolerance > 0.0)) throw DomainError("tolerance must be positive");
    if (o.max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (!(o.armijo > 0.0 && o.armijo < 1.0)) throw DomainError("armijo must lie in (0,1)");
    if (!(o.backtrack > 0.0 && o.backtrack < 1.0)) throw DomainError("backtrack must lie in (0,1)");
}

std::pair<Slice, Slice> boundary_slices(const Grid& grid, const Slice& m0, const Slice& mT)
{
    auto one = [&](const Slice& m) {
        if (static_cast<int>(m.size()) != grid.nx()) throw ShapeError("boundary_slices: density length differs from nx");
        Slice f(m.size());
        for (std::size_t j = 0; j < m.size(); ++j) f[j] = m[j] - 1.0;
        Slice F = antiderivative_x(f, grid.dx());
        double iota = slice_mean(F);
        for (double& v : F) v -= iota;
        return F;
    };
    return {one(m0), one(mT)};
}

std::pair<Slice, Slice> boundary_slices(const PlanningSpec& spec)
{
    return boundary_slices(spec.grid, spec.m0, spec.mT);
}

PotentialPair interpolant(const Grid& g, const Slice& a, const Slice& b)
{
    PotentialPair pp{Field(g), TimeSeries(g.nt(), 0.0)};
    for (int n = 0; n < g.nt(); ++n) {
        double s = static_cast<double>(n) / (g.nt() - 1);
        for (int j = 0; j < g.nx(); ++j) pp.phi(n, j) = (1.0 - s) * a[j] + s * b[j];
    }
    std::copy(a.begin(), a.end(), pp.phi.row(0).begin());
    std::copy(b.begin(), b.end(), pp.phi.row(g.nt() - 1).begin());
    return pp;
}

PotentialPair initial_guess(const PlanningSpec& spec)
{
    auto [a, b] = boundary_slices(spec);
    return interpolant(spec.grid, a, b);
}

double min_density(const PotentialPair& pp)
{
    return dx_periodic(pp.phi).min() + 1.0;
}

bool is_feasible(const PlanningSpec& spec, const PotentialPair& pp, double floor)
{
    check_shape(spec, pp);
    auto [a, b] = boundary_slices(spec);
    const Grid& g = spec.grid;
    for (int j = 0; j < g.nx(); ++j)
        if (pp.phi(0, j) != a[j] || pp.phi(g.nt() - 1, j) != b[j]) return false;
    for (int n = 0; n < g.nt(); ++n)
        if (std::abs(integrate_x(pp.phi, n)) > 1e-10) return false;
    return min_density(pp) >= floor;
}

double objective(const PlanningSpec& spec, const PotentialPair& pp)
{
    check_shape(spec, pp);
    const Grid& g = spec.grid;
    Field z(g), m(g), integrand(g);
    flux_density(spec, pp, z, m);
    kernels::PlanningPass pass{z.values(), m.values(), spec.potential, integrand.values(), {}, {}};
    kernels::omp::planning_pointwise(pointwise_model(spec), pass, g.nt(), g.nx());
    return integrate_xt(integrand);
}

Gradient gradient(const PlanningSpec& spec, const PotentialPair& pp)
{
    check_shape(spec, pp);
    const Grid& g = spec.grid;
    Field z(g), m(g), integrand(g), pz(g), cm(g);
    flux_density(spec, pp, z, m);
    double floor = std::max(spec.opt.delta_floor, 0.0);
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j)
            if (!(m(n, j) > 0.0) || m(n, j) < floor) {
                std::ostringstream os;
                os << "gradient: evaluation at infeasible point (phi_x + 1 = " << m(n, j) << " at node " << n
                   << "," << j << ")";
                throw DomainError(os.str());
            }
    kernels::PlanningPass pass{z.values(), m.values(), spec.potential, integrand.values(), pz.values(), cm.values()};
    kernels::omp::planning_pointwise(pointwise_model(spec), pass, g.nt(), g.nx());

    Gradient out{Field(g), TimeSeries(g.nt(), 0.0)};
    for (int n = 0; n < g.nt(); ++n) out.dq[n] = integrate_x(pz, n);

    scale_rows_by_weight(pz);
    scale_rows_by_weight(cm);
    Field raw = dt_transpose(pz);
    raw += dx_transpose(cm);
    if (spec.order == 1) raw -= dxx_periodic(pz);
    for (int n = 1; n < g.nt() - 1; ++n) {
        double w = g.node_weight(n);
        auto r = raw.row(n);
        auto o = out.dphi.row(n);
        for (int j = 0; j < g.nx(); ++j) o[j] = r[j] / w;
    }
    remove_row_means(out.dphi);
    return out;
}

double pairing(const Gradient& g, const Field& dphi, const TimeSeries& dq)
{
    return inner_w(g.dphi, dphi) + inner_t(g.dphi.grid(), g.dq, dq);
}

void clip_density(Field& phi, double floor)
{
    const Grid& g = phi.grid();
    const int nx = g.nx();
    const double dx = g.dx();
    const double lo = (floor - 1.0) * dx;
    std::vector<double> d(nx);
    for (int n = 1; n < g.nt() - 1; ++n) {
        auto r = phi.row(n);
        bool bad = false;
        for (int j = 0; j < nx; ++j) {
            int jp = j + 1 == nx ? 0 : j + 1;
            int jm = j == 0 ? nx - 1 : j - 1;
            if ((r[jp] - r[jm]) / (2.0 * dx) + 1.0 < floor) bad = true;
        }
        if (!bad) continue;
        double deficit = 0.0, slack = 0.0;
        for (int j = 0; j < nx; ++j) {
            d[j] = r[j + 1 == nx ? 0 : j + 1] - r[j];
            if (d[j] < lo) {
                deficit += lo - d[j];
                d[j] = lo;
            } else {
                slack += d[j] - lo;
            }
        }
        if (slack <= deficit) throw DomainError("clip_density: row cannot be made feasible");
        double frac = deficit / slack;
        for (int j = 0; j < nx; ++j)
            if (d[j] > lo) d[j] -= frac * (d[j] - lo);
        double acc = r[0];
        for (int j = 1; j < nx; ++j) {
            acc += d[j - 1];
            r[j] = acc;
        }
        double mean = slice_mean(r);
        for (double& v : r) v -= mean;
    }
}

namespace {

PotentialPair axpy(const PotentialPair& x, double s, const Gradient& d)
{
    PotentialPair y = x;
    auto& yv = y.phi.values();
    const auto& dv = d.dphi.values();
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] -= s * dv[i];
    for (std::size_t n = 0; n < y.q.size(); ++n) y.q[n] -= s * d.dq[n];
    return y;
}

struct Diff {
    Field dphi;
    TimeSeries dq;
};

Diff difference(const PotentialPair& a, const PotentialPair& b)
{
    Diff r{a.phi - b.phi, a.q};
    for (std::size_t n = 0; n < r.dq.size(); ++n) r.dq[n] -= b.q[n];
    return r;
}

double sup_norm(const Diff& d)
{
    double m = d.dphi.max_abs();
    for (double v : d.dq) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

SolveReport minimize(const PlanningSpec& spec)
{
    return minimize(spec, initial_guess(spec));
}

SolveReport minimize(const PlanningSpec& spec, PotentialPair x)
{
    validate_spec(spec);
    check_shape(spec, x);
    auto t0 = std::chrono::steady_clock::now();
    const Grid& g = spec.grid;
    const auto& o = spec.opt;

    {
        auto [a, b] = boundary_slices(spec);
        std::copy(a.begin(), a.end(), x.phi.row(0).begin());
        std::copy(b.begin(), b.end(), x.phi.row(g.nt() - 1).begin());
        for (int n = 1; n < g.nt() - 1; ++n) {
            auto r = x.phi.row(n);
            double mean = slice_mean(r);
            for (double& v : r) v -= mean;
        }
        clip_density(x.phi, o.delta_floor);
    }

    double f = objective(spec, x);
    if (!std::isfinite(f)) throw DomainError("minimize: starting point has infinite objective");
    Gradient gr = gradient(spec, x);

    SolveReport rep{x};
    double step = 1.0;
    int it = 0;
    for (;; ++it) {
        PotentialPair probe = axpy(x, 1.0, gr);
        clip_density(probe.phi, o.delta_floor);
        double pg = sup_norm(difference(x, probe));

        Field m = dx_periodic(x.phi);
        for (double& v : m.values()) v += 1.0;
        double qd = 0.0;
        for (double v : gr.dq) qd = std::max(qd, std::abs(v));
        rep.trace.push_back({it, f, pg, step, m.min(), mass_defect(m), qd});
        rep.pg_norm = pg;

        if (pg <= o.tolerance) {
            rep.converged = true;
            break;
        }
        if (it >= o.max_iters) break;

        bool accepted = false;
        double s = step;
        PotentialPair trial = x;
        Gradient gt = gr;
        double ft = f;
        for (int k = 0; k <= o.max_backtracks; ++k, s *= o.backtrack) {
            trial = axpy(x, s, gr);
            clip_density(trial.phi, o.delta_floor);
            ft = objective(spec, trial);
            if (!std::isfinite(ft)) continue;
            Diff d = difference(trial, x);
            double dec = pairing(gr, d.dphi, d.dq);
            if (ft <= f + o.armijo * dec) {
                gt = gradient(spec, trial);
                accepted = true;
                break;
            }
            // round-off regime: accept if the directional derivative at the trial
            // point is still non-positive (descent certificate for convex f)
            if (ft <= f + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f)) {
                Gradient gc = gradient(spec, trial);
                if (pairing(gc, d.dphi, d.dq) <= 0.0) {
                    gt = std::move(gc);
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            std::ostringstream os;
            os << "minimize: line-search failure at iteration " << it << " (objective " << f
               << ", projected gradient " << pg << ", last step " << s << ")";
            throw LineSearchError(os.str());
        }

        // Barzilai-Borwein step for the next trial
        Diff sk = difference(trial, x);
        Field yk = gt.dphi - gr.dphi;
        TimeSeries yq(g.nt());
        for (int n = 0; n < g.nt(); ++n) yq[n] = gt.dq[n] - gr.dq[n];
        double ss = inner_w(sk.dphi, sk.dphi) + inner_t(g, sk.dq, sk.dq);
        double sy = inner_w(sk.dphi, yk) + inner_t(g, sk.dq, yq);
        step = sy > 0.0 ? ss / sy : 2.0 * s;
        step = std::clamp(step, 1e-12, 1e12);

        x = std::move(trial);
        gr = std::move(gt);
        f = ft;
    }

    rep.minimizer = std::move(x);
    rep.objective = f;
    rep.iterations = it;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

PotentialPair random_feasible(const PlanningSpec& spec, std::uint64_t seed, double scale)
{
    return perturb_feasible(initial_guess(spec), seed, scale);
}

PotentialPair perturb_feasible(PotentialPair pp, std::uint64_t seed, double scale)
{
    const Grid& g = pp.phi.grid();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double pi = std::numbers::pi;

    Field pert(g);
    for (int l = 1; l <= 2; ++l)
        for (int k = 1; k <= 2; ++k) {
            double a = U(rng), b = U(rng);
            for (int n = 1; n < g.nt() - 1; ++n) {
                double st = std::sin(l * pi * g.t(n) / g.horizon());
                for (int j = 0; j < g.nx(); ++j)
                    pert(n, j) += st * (a * std::cos(2 * pi * k * g.x(j)) + b * std::sin(2 * pi * k * g.x(j)));
            }
        }
    remove_row_means(pert);
    double slope = dx_periodic(pert).max_abs();
    double mmin = min_density(pp);
    double amp = slope > 0.0 ? 0.5 * mmin * scale / slope : 0.0;
    pert *= amp;
    pp.phi += pert;
    for (int l = 0; l <= 2; ++l) {
        double c = 0.5 * scale * U(rng);
        for (int n = 0; n < g.nt(); ++n) pp.q[n] += c * std::cos(l * pi * g.t(n) / g.horizon());
    }
    return pp;
}

}  // namespace mfgp
