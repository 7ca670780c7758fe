#pragma once

#include <stdexcept>
#include <string>

namespace conestab {

// Base of every failure this library raises on purpose. Anything else
// escaping is a bug.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionTooSmall : Error {
    using Error::Error;
};

struct ApertureOutOfRange : Error {
    using Error::Error;
};

// Quadrature could not produce a usable value at all (bad grid, NaN).
struct QuadratureFailure : Error {
    using Error::Error;
};

// Two grid refinements disagree beyond tolerance; the integrand is
// probably inadmissible for the requested weight.
struct NonConvergent : Error {
    using Error::Error;
};

// Eigenvalue bracket/bisection search exhausted its range.
struct NoConvergence : Error {
    using Error::Error;
};

struct Overflow : Error {
    using Error::Error;
};

// lambda1 sits exactly on a boundary of the ordering condition and tie
// handling was not requested.
struct ThresholdAmbiguity : Error {
    using Error::Error;
};

struct ZeroFunction : Error {
    using Error::Error;
};

struct DivergentIntegral : Error {
    using Error::Error;
};

// mu3 <= mu2 in a supplied spectrum: degenerate minimizer.
struct GapViolation : Error {
    using Error::Error;
};

// An operation needed the explicit angular eigenfunction of a cap but the
// cone was given only as (lambda1, |D|).
struct MissingAngularProfile : Error {
    using Error::Error;
};

}  // namespace conestab
