#pragma once

#include <stdexcept>
#include <string>

namespace rsmfg {

/// Invalid argument or out-of-domain input (e.g. theta below the admissible cutoff).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Iterative solver failed to converge; carries the last residual seen.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, double residual)
        : std::runtime_error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

/// Grid or truncation problem: domain too narrow, boundary touching truncation,
/// empty contact set on the grid.
class GridError : public std::runtime_error {
public:
    explicit GridError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structural numerical failure: singular or reducible systems, monotonicity
/// violations, bracket inversion.
class NumericsError : public std::runtime_error {
public:
    explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rsmfg
