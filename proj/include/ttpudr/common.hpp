#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ttpudr {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape, mode-index, or rank inconsistencies.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration (bad ranks, fractions, iteration counts, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Malformed or inconsistent input data / files.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Numerical failures (solver breakdown, rank deficiency, ...).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// XDX^T (or a similar constraint matrix) is singular; raised by the LPP
/// baseline when the data dimension exceeds the sample count and no PCA
/// pre-projection was requested.
class SingularConstraintError : public NumericalError {
public:
    explicit SingularConstraintError(const std::string& msg) : NumericalError(msg) {}
};

/// Materializing a full tensor-train chain would exceed the element cap.
class ElementCapError : public Error {
public:
    explicit ElementCapError(const std::string& msg) : Error(msg) {}
};

}  // namespace ttpudr
