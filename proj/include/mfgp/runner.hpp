#pragma once

#include "mfgp/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfgp {

struct AssumptionCheck {
    int id;  // 1..4
    std::string name;
    bool pass;
    std::string detail;  // sampled witness on failure
};

// Sampled checks of the four standing assumptions (coupling convexity, growth,
// density lower bound, Lagrangian growth).
std::vector<AssumptionCheck> check_assumptions(const PlanningSpec& spec, std::uint64_t seed);
// Density lower bound and the exponent hypotheses of the congestion problem.
std::vector<AssumptionCheck> check_assumptions(const CongestionSpec& spec);

// Exit status: 0 success, 2 flagged non-convergence (or failed assumptions in
// validate mode), 1 error. Output files go to cfg.output.
int run(const RunConfig& cfg, std::ostream& log);
int run_validate(const RunConfig& cfg, std::ostream& log);

}  // namespace mfgp
