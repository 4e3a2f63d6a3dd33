#pragma once

#include "mfgp/grid.hpp"
#include "mfgp/planning.hpp"

namespace mfgp {

struct MFGSolution {
    Field u;           // u(t,0) = 0 (antiderivative convention)
    Field m;
    TimeSeries c;      // spatial mean of the HJ expression
    TimeSeries theta;  // cumulative trapezoid of c; u + theta solves HJ
    Field residual_hj; // x-mean-free HJ residual, zero on t = 0, T rows
    Field residual_fp;
    TimeSeries period_defect;  // int L'(w) dx per time node, i.e. u(t,1-) - u(t,0)
};

// Residuals use the recovered u: u_x is its central difference, not L'(w).
MFGSolution recover(const PlanningSpec& spec, const PotentialPair& pp);

struct SolutionDiagnostics {
    double residual_hj = 0.0;
    double residual_fp = 0.0;
    double mass_defect = 0.0;
    double min_density = 0.0;
    double mismatch_m0 = 0.0;
    double mismatch_mT = 0.0;
    double periodicity_defect = 0.0;  // max_t |int L'(w) dx|
};

SolutionDiagnostics validate_solution(const MFGSolution& sol, const PlanningSpec& spec);

// Sup norm over rows 1..nt-2 (the open time interval).
double interior_sup(const Field& f);

}  // namespace mfgp
