#include "mfgp/runner.hpp"

#include "mfgp/error.hpp"
#include "mfgp/io.hpp"
#include "mfgp/recovery.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace mfgp {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

json num(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json grid_json(const Grid& g)
{
    return {{"nt", g.nt()}, {"nx", g.nx()}, {"T", g.horizon()}};
}

void write_pair(const fs::path& dir, const PotentialPair& pp)
{
    const Grid& g = pp.phi.grid();
    write_table_csv((dir / "solution_phi.csv").string(), table_from_field(pp.phi));
    std::vector<double> t;
    for (int n = 0; n < g.nt(); ++n) t.push_back(g.t(n));
    write_series_csv((dir / "solution_q.csv").string(), t, pp.q, "q");
}

void write_um(const fs::path& dir, const MFGSolution& s)
{
    write_table_csv((dir / "solution_u.csv").string(), table_from_field(s.u));
    write_table_csv((dir / "solution_m.csv").string(), table_from_field(s.m));
}

int run_planning(const RunConfig& cfg, const fs::path& dir, std::ostream& log)
{
    const PlanningSpec& spec = *cfg.planning;
    PotentialPair start = cfg.start == StartKind::random ? random_feasible(spec, cfg.seed, cfg.start_scale)
                                                         : initial_guess(spec);
    SolveReport rep = minimize(spec, start);
    write_pair(dir, rep.minimizer);

    std::vector<std::vector<double>> rows;
    for (const IterateRecord& r : rep.trace)
        rows.push_back({double(r.iter), r.objective, r.pg_norm, r.step, r.min_density, r.mass_defect, r.q_defect});
    write_rows_csv((dir / "diagnostics.csv").string(),
                   {"iter", "objective", "pg_norm", "step", "min_density", "mass_defect", "q_defect"}, rows);

    json report = {{"mode", "planning"},
                   {"seed", cfg.seed},
                   {"grid", grid_json(spec.grid)},
                   {"order", spec.order},
                   {"hamiltonian", spec.hamiltonian.name()},
                   {"coupling", spec.coupling.name()},
                   {"converged", rep.converged},
                   {"iterations", rep.iterations},
                   {"objective", num(rep.objective)},
                   {"pg_norm", num(rep.pg_norm)},
                   {"wall_seconds", rep.wall_seconds}};
    json trace = json::array();
    for (const IterateRecord& r : rep.trace) trace.push_back(num(r.objective));
    report["objective_trace"] = trace;

    int status = rep.converged ? 0 : 2;
    try {
        auto t0 = std::chrono::steady_clock::now();
        MFGSolution sol = recover(spec, rep.minimizer);
        SolutionDiagnostics d = validate_solution(sol, spec);
        write_um(dir, sol);
        report["residuals"] = {{"hj", num(d.residual_hj)},
                               {"fp", num(d.residual_fp)},
                               {"mass_defect", num(d.mass_defect)},
                               {"min_density", num(d.min_density)},
                               {"mismatch_m0", num(d.mismatch_m0)},
                               {"mismatch_mT", num(d.mismatch_mT)},
                               {"periodicity_defect", num(d.periodicity_defect)}};
        report["recovery_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (const Error& e) {
        report["recovery_error"] = e.what();
        if (status == 0) status = 1;
    }
    report["status"] = status;
    write_json(dir / "report.json", report);
    log << "planning: " << (rep.converged ? "converged" : "NOT converged") << " after " << rep.iterations
        << " iterations, objective " << fmt(rep.objective) << ", projected gradient " << fmt(rep.pg_norm) << '\n';
    if (report.contains("residuals"))
        log << "  residuals: hj " << fmt(report["residuals"]["hj"].get<double>()) << ", fp "
            << fmt(report["residuals"]["fp"].get<double>()) << '\n';
    return status;
}

int run_congestion(const RunConfig& cfg, const fs::path& dir, std::ostream& log)
{
    const CongestionSpec& spec = *cfg.congestion;
    CongestionReport rep = solve_congestion(spec);
    write_pair(dir, rep.solution);

    std::vector<std::vector<double>> rows;
    for (const OuterRecord& r : rep.trace) {
        double kind = r.step == "newton" ? 0 : r.step == "picard" ? 1 : 2;
        rows.push_back({r.eps, double(r.iter), r.residual, kind, r.step_length});
    }
    write_rows_csv((dir / "diagnostics.csv").string(), {"eps", "iter", "residual", "step_kind", "step_length"}, rows);

    std::vector<std::vector<double>> levels;
    json lv = json::array();
    for (const LevelRecord& l : rep.levels) {
        levels.push_back({l.eps, double(l.iterations), l.residual, double(l.converged), l.reg_energy, l.moment,
                          l.kinetic, l.energy_lhs, l.bound, l.change});
        lv.push_back({{"eps", l.eps},
                      {"iterations", l.iterations},
                      {"residual", num(l.residual)},
                      {"converged", l.converged},
                      {"reg_energy", num(l.reg_energy)},
                      {"moment", num(l.moment)},
                      {"kinetic", num(l.kinetic)},
                      {"energy_lhs", num(l.energy_lhs)},
                      {"bound", num(l.bound)},
                      {"change", num(l.change)}});
    }
    write_rows_csv((dir / "levels.csv").string(),
                   {"eps", "iterations", "residual", "converged", "reg_energy", "moment", "kinetic", "energy_lhs",
                    "bound", "change"},
                   levels);

    json report = {{"mode", "congestion"},
                   {"seed", cfg.seed},
                   {"grid", grid_json(spec.grid)},
                   {"alpha", spec.alpha},
                   {"mu", spec.mu},
                   {"kappa", spec.kappa()},
                   {"kappa_alt", spec.kappa_alt()},
                   {"converged", rep.converged},
                   {"message", rep.message},
                   {"levels", lv},
                   {"wall_seconds", rep.wall_seconds}};
    int status = rep.converged ? 0 : 2;
    try {
        MFGSolution sol = recover_congestion(spec, rep.solution);
        write_um(dir, sol);
        report["residuals"] = {{"hj", num(interior_sup(sol.residual_hj))}, {"fp", num(interior_sup(sol.residual_fp))}};
    } catch (const Error& e) {
        report["recovery_error"] = e.what();
    }
    if (rep.converged && cfg.certificate_tests > 0) {
        CertificateResult c = weak_certificate(spec, rep.solution, cfg.certificate_tests, cfg.seed);
        report["certificate"] = {{"tests", c.tests}, {"min_pairing", num(c.min_pairing)}};
    }
    report["status"] = status;
    write_json(dir / "report.json", report);
    log << "congestion: " << (rep.converged ? "converged" : "NOT converged") << " over " << rep.levels.size()
        << " eps levels";
    if (!rep.levels.empty()) log << ", final eps " << fmt(rep.levels.back().eps);
    log << '\n';
    if (!rep.message.empty()) log << "  " << rep.message << '\n';
    return status;
}

int run_hughes(const RunConfig& cfg, const fs::path& dir, std::ostream& log)
{
    const HughesSpec& spec = *cfg.hughes;
    auto t0 = std::chrono::steady_clock::now();
    HughesSolution sol = solve_hughes(spec);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto [name, field] : {std::pair<const char*, const std::vector<double>*>{"solution_phi.csv", &sol.phi},
                               {"solution_rho.csv", &sol.rho},
                               {"solution_argmin.csv", &sol.argmin}})
        write_table_csv((dir / name).string(), Table{sol.t, sol.x, *field});

    std::vector<std::vector<double>> rows;
    const std::size_t nx = sol.x.size();
    for (std::size_t n = 0; n < sol.t.size(); ++n) {
        auto first = sol.rho.begin() + n * nx, last = first + nx;
        double mass = sol.phi[n * nx + nx - 1] - sol.phi[n * nx];
        rows.push_back({sol.t[n], mass, *std::min_element(first, last), *std::max_element(first, last)});
    }
    write_rows_csv((dir / "diagnostics.csv").string(), {"t", "mass", "min_rho", "max_rho"}, rows);

    json report = {{"mode", "hughes"},
                   {"law", spec.law == SpeedLaw::linear ? "linear" : "congestion"},
                   {"branch", spec.branch == Branch::increasing ? "increasing" : "decreasing"},
                   {"window", {spec.x_min, spec.x_max}},
                   {"samples", spec.rho0.size()},
                   {"evaluated_x", {sol.x.front(), sol.x.back()}},
                   {"nt", spec.nt},
                   {"t_final", spec.t_final},
                   {"eikonal_residual", num(sol.eikonal_residual)},
                   {"converged", true},
                   {"status", 0},
                   {"wall_seconds", secs}};
    write_json(dir / "report.json", report);
    log << "hughes: " << sol.t.size() << " x " << nx << " lattice, eikonal residual " << fmt(sol.eikonal_residual)
        << '\n';
    return 0;
}

void print_checks(const std::vector<AssumptionCheck>& checks, std::ostream& log)
{
    for (const AssumptionCheck& c : checks) {
        log << "Assumption " << c.id << " (" << c.name << "): " << (c.pass ? "PASS" : "FAIL");
        if (!c.detail.empty()) log << " - " << c.detail;
        log << '\n';
    }
}

AssumptionCheck density_bound(const Slice& m0, const Slice& mT, const Grid& g)
{
    AssumptionCheck c{3, "densities bounded below by k0 > 0", true, ""};
    double k0 = std::numeric_limits<double>::infinity();
    std::string where;
    for (auto [name, m] : {std::pair<const char*, const Slice*>{"m0", &m0}, {"mT", &mT}})
        for (std::size_t j = 0; j < m->size(); ++j)
            if ((*m)[j] < k0) {
                k0 = (*m)[j];
                where = std::string(name) + " at x = " + fmt(g.x(static_cast<int>(j))) + " (index " +
                        std::to_string(j) + ")";
            }
    c.pass = k0 > 0.0;
    c.detail = c.pass ? "k0 = " + fmt(k0) : "minimum " + fmt(k0) + " at " + where;
    return c;
}

}  // namespace

std::vector<AssumptionCheck> check_assumptions(const PlanningSpec& spec, std::uint64_t seed)
{
    std::vector<AssumptionCheck> out;
    const Coupling& G = spec.coupling;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> Z(-5.0, 5.0), U(0.01, 0.99);

    AssumptionCheck a1{1, "G strictly convex", true, ""};
    double worst_conv = 0.0;
    std::string conv_witness;
    for (int k = 0; k < 4000; ++k) {
        double z1 = Z(rng), z2 = Z(rng), t = U(rng);
        double g1 = G.G(z1), g2 = G.G(z2);
        double gap = t * g1 + (1 - t) * g2 - G.G(t * z1 + (1 - t) * z2);
        double tol = 1e-12 * (1.0 + std::abs(g1) + std::abs(g2));
        if (a1.pass && !(gap > tol)) {
            a1.pass = false;
            a1.detail = "no strict gap at z1 = " + fmt(z1) + ", z2 = " + fmt(z2) + ", t = " + fmt(t) + " (gap " +
                        fmt(gap) + ")";
        }
        if (gap < worst_conv - tol) {
            worst_conv = gap;
            conv_witness = "z1 = " + fmt(z1) + ", z2 = " + fmt(z2) + ", t = " + fmt(t);
        }
    }
    out.push_back(a1);

    AssumptionCheck a2{2, "G convex with growth G(z) >= C|z|^gamma - C, gamma > 1", true, ""};
    const double C = G.growth_C(), gm = G.gamma();
    if (!(gm > 1.0) || !(C > 0.0)) {
        a2.pass = false;
        a2.detail = "declared constants C = " + fmt(C) + ", gamma = " + fmt(gm) + " do not satisfy C > 0, gamma > 1";
    } else if (worst_conv < 0.0) {
        a2.pass = false;
        a2.detail = "convexity violated at " + conv_witness;
    } else {
        for (int k = 0; k <= 20000 && a2.pass; ++k) {
            double z = -100.0 + 200.0 * k / 20000.0;
            double lhs = G.G(z), rhs = C * std::pow(std::abs(z), gm) - C;
            if (lhs < rhs - 1e-12 * (1.0 + std::abs(rhs))) {
                a2.pass = false;
                a2.detail = "growth fails at z = " + fmt(z) + ": G = " + fmt(lhs) + " < " + fmt(rhs);
            }
        }
        if (a2.pass) a2.detail = "C = " + fmt(C) + ", gamma = " + fmt(gm);
    }
    out.push_back(a2);

    out.push_back(density_bound(spec.m0, spec.mT, spec.grid));

    AssumptionCheck a4{4, "Lagrangian growth L(w) >= C|w|^beta, beta > 1", true, ""};
    const double beta = spec.hamiltonian.growth_exponent();
    Lagrangian L = spec.lagrangian();
    double cmin = std::numeric_limits<double>::infinity(), wmin = 0.0;
    double l0 = L(0.0);
    for (int k = 0; k <= 2000; ++k) {
        double w = -50.0 + 100.0 * k / 2000.0;
        if (w == 0.0) continue;
        double r = L(w) / std::pow(std::abs(w), beta);
        if (r < cmin) {
            cmin = r;
            wmin = w;
        }
    }
    if (!(beta > 1.0)) {
        a4.pass = false;
        a4.detail = "beta = " + fmt(beta) + " is not > 1";
    } else if (l0 < 0.0) {
        a4.pass = false;
        a4.detail = "L(0) = " + fmt(l0) + " < 0, witness w = 0";
    } else if (!(cmin > 0.0)) {
        a4.pass = false;
        a4.detail = "L(w)/|w|^beta = " + fmt(cmin) + " at w = " + fmt(wmin);
    } else {
        a4.detail = "beta = " + fmt(beta) + ", sampled C = " + fmt(cmin);
    }
    out.push_back(a4);
    return out;
}

std::vector<AssumptionCheck> check_assumptions(const CongestionSpec& spec)
{
    std::vector<AssumptionCheck> out;
    out.push_back(density_bound(spec.m0, spec.mT, spec.grid));
    AssumptionCheck e{0, "exponents alpha in (0,2), mu > 0, alpha < mu + 1", true, ""};
    e.pass = spec.alpha > 0.0 && spec.alpha < 2.0 && spec.mu > 0.0 && spec.alpha < spec.mu + 1.0;
    e.detail = "alpha = " + fmt(spec.alpha) + ", mu = " + fmt(spec.mu) + ", kappa = " + fmt(spec.kappa());
    out.push_back(e);
    return out;
}

int run_validate(const RunConfig& cfg, std::ostream& log)
{
    std::vector<AssumptionCheck> checks;
    if (cfg.planning) {
        checks = check_assumptions(*cfg.planning, cfg.seed);
    } else if (cfg.congestion) {
        checks = check_assumptions(*cfg.congestion);
    } else if (cfg.hughes) {
        validate_spec(*cfg.hughes);
        log << "hughes: spec valid (rho0 monotone for the selected branch, window nonempty)\n";
        return 0;
    }
    print_checks(checks, log);
    bool ok = std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
    json j = json::array();
    for (const AssumptionCheck& c : checks)
        j.push_back({{"assumption", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    fs::create_directories(cfg.output);
    write_json(fs::path(cfg.output) / "validation.json", {{"mode", "validate"}, {"checks", j}, {"pass", ok}});
    return ok ? 0 : 2;
}

int run(const RunConfig& cfg, std::ostream& log)
{
    if (cfg.mode == Mode::validate) return run_validate(cfg, log);
    fs::path dir(cfg.output);
    fs::create_directories(dir);
    switch (cfg.mode) {
    case Mode::planning: return run_planning(cfg, dir, log);
    case Mode::congestion: return run_congestion(cfg, dir, log);
    case Mode::hughes: return run_hughes(cfg, dir, log);
    default: break;
    }
    return 1;
}

}  // namespace mfgp
