#pragma once

#include <stdexcept>
#include <string>

namespace perihom {

// Everything thrown by the library derives from Error so the CLI can catch
// one type at the top and map it to a nonzero exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// invalid scalar parameters, inadmissible epsilon/delta combinations, bad config values
class ParameterError : public Error {
public:
    using Error::Error;
};

// inadmissible microstructure (disconnected Y_*, hole touching the cell boundary, ...)
class GeometryError : public Error {
public:
    using Error::Error;
};

// hole boundary not resolved by the micro grid
class AlignmentError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : Error(what), final_residual(residual), iterations(iterations) {}
    double final_residual = 0.0;
    int iterations = 0;
};

// mismatched snapshot cadence or grids in paired micro/limit runs
class PairingError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class ConfigError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

} // namespace perihom
