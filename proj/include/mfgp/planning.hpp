#pragma once

#include "mfgp/grid.hpp"
#include "mfgp/model.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace mfgp {

struct PotentialPair {
    Field phi;
    TimeSeries q;
};

struct OptimizerSettings {
    int max_iters = 200000;
    double tolerance = 1e-8;    // eps_opt, sup norm of the projected gradient
    double delta_floor = 1e-8;  // phi_x + 1 >= delta_floor
    double armijo = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
};

struct PlanningSpec {
    Grid grid;
    int order = 0;  // lambda in {0, 1}
    Hamiltonian hamiltonian = Hamiltonian::quadratic();
    Coupling coupling = Coupling::quadratic();
    Slice potential;  // V sampled on the x nodes
    Slice m0, mT;
    OptimizerSettings opt;

    Lagrangian lagrangian() const { return Lagrangian(hamiltonian); }
    // existence exponent beta*gamma/(beta+gamma-1); metadata only
    double sigma() const;
};

// Standard test instance: m0 = 1 + amp sin(2 pi x), mT = 1, quadratic H and G, V = 0.
PlanningSpec sine_instance(int nt, int nx, double amp = 0.1, int order = 0);

void validate_spec(const PlanningSpec& spec);

std::pair<Slice, Slice> boundary_slices(const PlanningSpec& spec);
std::pair<Slice, Slice> boundary_slices(const Grid& grid, const Slice& m0, const Slice& mT);
// phi linear in t between the two slices, q = 0; end rows copied exactly
PotentialPair interpolant(const Grid& grid, const Slice& a, const Slice& b);
PotentialPair initial_guess(const PlanningSpec& spec);

// True if boundary rows match, rows have zero mean and phi_x + 1 >= floor.
bool is_feasible(const PlanningSpec& spec, const PotentialPair& pp, double floor);
double min_density(const PotentialPair& pp);

double objective(const PlanningSpec& spec, const PotentialPair& pp);

struct Gradient {
    Field dphi;
    TimeSeries dq;
};

// Gradient with respect to the weighted pairing sum W phi psi + sum w_t q r,
// restricted to admissible directions (pinned boundary rows, zero row mean).
Gradient gradient(const PlanningSpec& spec, const PotentialPair& pp);

double pairing(const Gradient& g, const Field& dphi, const TimeSeries& dq);

// Restore phi_x + 1 >= floor by the increment clip pass; no-op when already satisfied.
void clip_density(Field& phi, double floor);

struct IterateRecord {
    int iter;
    double objective;
    double pg_norm;
    double step;
    double min_density;
    double mass_defect;  // max_t |int m dx - 1|
    double q_defect;     // max_t |int dL0/dq dx|
};

struct SolveReport {
    PotentialPair minimizer;
    std::vector<IterateRecord> trace;
    double objective = 0.0;
    double pg_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double wall_seconds = 0.0;
};

SolveReport minimize(const PlanningSpec& spec);
SolveReport minimize(const PlanningSpec& spec, PotentialPair start);

// Random strictly feasible pair: initial guess plus smooth low-mode perturbations
// scaled so that phi_x + 1 stays above half the smallest boundary density.
PotentialPair random_feasible(const PlanningSpec& spec, std::uint64_t seed, double scale = 1.0);
// Same perturbation around an arbitrary pinned, strictly feasible base pair.
PotentialPair perturb_feasible(PotentialPair base, std::uint64_t seed, double scale = 1.0);

}  // namespace mfgp
