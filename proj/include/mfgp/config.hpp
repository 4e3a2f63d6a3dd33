#pragma once

#include "mfgp/congestion.hpp"
#include "mfgp/hughes.hpp"
#include "mfgp/planning.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace mfgp {

enum class Mode { planning, congestion, hughes, validate };

enum class StartKind { interpolant, random };

struct RunConfig {
    Mode mode = Mode::planning;
    std::uint64_t seed = 0;
    std::string output = "out";
    std::optional<PlanningSpec> planning;      // planning and validate modes
    StartKind start = StartKind::interpolant;  // planning warm start
    double start_scale = 1.0;
    std::optional<CongestionSpec> congestion;
    int certificate_tests = 50;
    std::optional<HughesSpec> hughes;
};

inline constexpr int schema_version = 1;

// Throws ConfigError; messages carry "line L, column C" for syntax errors and
// the dotted field path for schema and range violations.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_string(const std::string& text);

const char* mode_name(Mode m);

}  // namespace mfgp
