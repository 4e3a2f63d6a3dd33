#pragma once

#include <stdexcept>
#include <string>

namespace mfgp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grid mismatches, wrong slice lengths, bad grid sizes.
struct ShapeError : Error {
    using Error::Error;
};

// Argument outside the domain of a function (negative density, bad exponent, ...).
struct DomainError : Error {
    using Error::Error;
};

struct LegendreError : Error {
    LegendreError(const std::string& msg, double w_) : Error(msg), w(w_) {}
    double w;
};

struct LineSearchError : Error {
    using Error::Error;
};

struct DegenerateDensityError : Error {
    DegenerateDensityError(const std::string& msg, int n_, int j_) : Error(msg), n(n_), j(j_) {}
    int n, j;
};

struct WindowTooSmallError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace mfgp
