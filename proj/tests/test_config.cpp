#include "mfgp/config.hpp"
#include "mfgp/error.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace mfgp;

namespace {

std::string error_of(const std::string& text)
{
    try {
        parse_config_string(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part)
{
    return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("minimal planning config takes defaults")
{
    RunConfig c = parse_config_string(R"({"schema_version": 1, "mode": "planning",
        "planning": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}}})");
    REQUIRE(c.mode == Mode::planning);
    REQUIRE(c.planning);
    CHECK(c.planning->grid.nt() == 17);
    CHECK(c.planning->grid.nx() == 32);
    CHECK(c.planning->grid.horizon() == 1.0);
    CHECK(c.planning->order == 0);
    CHECK(c.planning->hamiltonian.kind() == Hamiltonian::Kind::quadratic);
    CHECK(c.planning->opt.tolerance == 1e-8);
    CHECK(c.planning->m0.size() == 32);
    for (double v : c.planning->m0) CHECK(v == 1.0);
    for (double v : c.planning->potential) CHECK(v == 0.0);
    CHECK(c.start == StartKind::interpolant);
    CHECK(c.output == "out");
    CHECK(!c.congestion);
    CHECK(!c.hughes);
}

TEST_CASE("sine density is sampled on the grid nodes")
{
    RunConfig c = parse_config_string(R"({"schema_version": 1, "mode": "planning", "grid": {"nt": 5, "nx": 8},
        "planning": {"m0": {"kind": "sine", "amplitude": 0.2, "mode": 2}, "mT": [1,1,1,1,1,1,1,1]}})");
    for (int j = 0; j < 8; ++j)
        CHECK(c.planning->m0[j] == doctest::Approx(1.0 + 0.2 * std::sin(2.0 * M_PI * 2 * j / 8.0)).epsilon(1e-14));
}

TEST_CASE("out of range exponent names the field")
{
    std::string e = error_of(R"({"schema_version": 1, "mode": "congestion",
        "congestion": {"alpha": 2.5, "mu": 1, "m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}}})");
    CHECK(contains(e, "congestion.alpha"));
    CHECK(contains(e, "2.5"));

    e = error_of(R"({"schema_version": 1, "mode": "planning",
        "planning": {"hamiltonian": {"kind": "power", "alpha": 0.5}, "m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}}})");
    CHECK(contains(e, "planning.hamiltonian.alpha"));
}

TEST_CASE("missing required field")
{
    std::string e = error_of(R"({"schema_version": 1, "mode": "planning", "planning": {"mT": {"kind": "uniform"}}})");
    CHECK(contains(e, "planning.m0"));
    CHECK(contains(e, "missing"));

    e = error_of(R"({"mode": "planning", "planning": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}}})");
    CHECK(contains(e, "schema_version"));
}

TEST_CASE("syntax error reports line and column")
{
    std::string e = error_of("{\n  \"schema_version\": 1,\n  \"mode\": planning\n}");
    CHECK(contains(e, "line 3"));
    CHECK(contains(e, "column"));
}

TEST_CASE("unknown fields are rejected")
{
    std::string e = error_of(R"({"schema_version": 1, "mode": "planning",
        "planning": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}, "tolerence": 1e-6}})");
    CHECK(contains(e, "planning.tolerence"));

    e = error_of(R"({"schema_version": 1, "mode": "planning", "colour": 1,
        "planning": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}}})");
    CHECK(contains(e, "colour"));
}

TEST_CASE("mode and block must agree")
{
    CHECK(!error_of(R"({"schema_version": 1, "mode": "hughes",
        "planning": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}}})").empty());
    CHECK(!error_of(R"({"schema_version": 2, "mode": "planning",
        "planning": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}}})").empty());
    CHECK(!error_of(R"({"schema_version": 1, "mode": "solve"})").empty());
}

TEST_CASE("density mass and sign are checked")
{
    CHECK(contains(error_of(R"({"schema_version": 1, "mode": "planning", "grid": {"nt": 3, "nx": 4},
        "planning": {"m0": [1, 1, 1, 2], "mT": {"kind": "uniform"}}})"),
                   "planning.m0"));
    CHECK(!error_of(R"({"schema_version": 1, "mode": "planning", "grid": {"nt": 3, "nx": 4},
        "planning": {"m0": [1, 1], "mT": {"kind": "uniform"}}})").empty());
}

TEST_CASE("hughes block")
{
    RunConfig c = parse_config_string(R"({"schema_version": 1, "mode": "hughes",
        "hughes": {"n": 11, "rho0": {"kind": "step", "left": 0.2, "right": 0.6, "at": 0.0}}})");
    REQUIRE(c.hughes);
    CHECK(c.hughes->rho0.size() == 11);
    CHECK(c.hughes->rho0.front() == 0.2);
    CHECK(c.hughes->rho0.back() == 0.6);

    std::string e = error_of(R"({"schema_version": 1, "mode": "hughes",
        "hughes": {"n": 11, "rho0": {"kind": "step", "left": 0.6, "right": 0.2}}})");
    CHECK(contains(e, "hughes"));
}

TEST_CASE("congestion defaults and schedule")
{
    RunConfig c = parse_config_string(R"({"schema_version": 1, "mode": "congestion",
        "congestion": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}, "method": "picard", "damping": 0.1,
                       "eps_schedule": [0.1, 0.01]}})");
    REQUIRE(c.congestion);
    CHECK(c.congestion->method == OuterMethod::picard);
    CHECK(c.congestion->eps_schedule.size() == 2);
    CHECK(c.certificate_tests == 50);

    CHECK(!error_of(R"({"schema_version": 1, "mode": "congestion",
        "congestion": {"m0": {"kind": "uniform"}, "mT": {"kind": "uniform"}, "eps_schedule": [0.01, 0.1]}})").empty());
}
