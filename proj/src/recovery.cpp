#include "mfgp/recovery.hpp"

#include "mfgp/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfgp {

MFGSolution recover(const PlanningSpec& spec, const PotentialPair& pp)
{
    const Grid& g = spec.grid;
    if (!(pp.phi.grid() == g)) throw ShapeError("recover: grid mismatch");
    const double floor = spec.opt.delta_floor;
    const Lagrangian L = spec.lagrangian();
    const Hamiltonian& H = spec.hamiltonian;

    MFGSolution s{Field(g), dx_periodic(pp.phi), TimeSeries(g.nt()), TimeSeries(g.nt()), Field(g), Field(g),
                  TimeSeries(g.nt())};
    for (double& v : s.m.values()) v += 1.0;
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j)
            if (!(s.m(n, j) > 0.0) || s.m(n, j) < floor) {
                std::ostringstream os;
                os << "recover: degenerate density " << s.m(n, j) << " at node (" << n << "," << j << ")";
                throw DegenerateDensityError(os.str(), n, j);
            }

    Field z = dt_interior(pp.phi);
    if (spec.order == 1) z -= dxx_periodic(pp.phi);
    Slice ux(g.nx());
    for (int n = 0; n < g.nt(); ++n) {
        double acc = 0.0;
        for (int j = 0; j < g.nx(); ++j) {
            ux[j] = L.derivative((z(n, j) + pp.q[n]) / s.m(n, j));
            acc += ux[j];
        }
        s.period_defect[n] = acc * g.dx();
        Slice u = antiderivative_x(ux, g.dx());
        std::copy(u.begin(), u.end(), s.u.row(n).begin());
    }

    Field Ux = dx_periodic(s.u);
    Field Ut = dt_interior(s.u);
    Field Uxx = dxx_periodic(s.u);
    Field E(g);
    for (int n = 0; n < g.nt(); ++n)
        for (int j = 0; j < g.nx(); ++j)
            E(n, j) = -Ut(n, j) - spec.order * Uxx(n, j) + H(Ux(n, j)) + spec.potential[j] - spec.coupling.g(s.m(n, j));
    for (int n = 0; n < g.nt(); ++n) s.c[n] = slice_mean(E.row(n));
    s.theta = antiderivative_t(s.c, g.dt());
    for (int n = 1; n < g.nt() - 1; ++n)
        for (int j = 0; j < g.nx(); ++j) s.residual_hj(n, j) = E(n, j) - s.c[n];

    Field flux(g);
    for (std::size_t i = 0; i < flux.values().size(); ++i)
        flux.values()[i] = H.derivative(Ux.values()[i]) * s.m.values()[i];
    s.residual_fp = dt_interior(s.m);
    if (spec.order == 1) s.residual_fp -= dxx_periodic(s.m);
    s.residual_fp -= dx_periodic(flux);
    return s;
}

double interior_sup(const Field& f)
{
    double r = 0.0;
    for (int n = 1; n < f.grid().nt() - 1; ++n)
        for (double v : f.row(n)) r = std::max(r, std::abs(v));
    return r;
}

SolutionDiagnostics validate_solution(const MFGSolution& sol, const PlanningSpec& spec)
{
    const Grid& g = sol.m.grid();
    SolutionDiagnostics d;
    d.residual_hj = sol.residual_hj.max_abs();
    d.residual_fp = sol.residual_fp.max_abs();
    d.min_density = sol.m.min();
    for (int n = 0; n < g.nt(); ++n) {
        d.mass_defect = std::max(d.mass_defect, std::abs(integrate_x(sol.m, n) - 1.0));
        if (n < static_cast<int>(sol.period_defect.size()))
            d.periodicity_defect = std::max(d.periodicity_defect, std::abs(sol.period_defect[n]));
    }
    for (int j = 0; j < g.nx(); ++j) {
        if (j < static_cast<int>(spec.m0.size()))
            d.mismatch_m0 = std::max(d.mismatch_m0, std::abs(sol.m(0, j) - spec.m0[j]));
        if (j < static_cast<int>(spec.mT.size()))
            d.mismatch_mT = std::max(d.mismatch_mT, std::abs(sol.m(g.nt() - 1, j) - spec.mT[j]));
    }
    return d;
}

}  // namespace mfgp
