#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace mobo {

using Vector  = Eigen::VectorXd;
using Matrix  = Eigen::MatrixXd;
using Vector2 = Eigen::Vector2d;

/// Caller handed us something malformed (wrong dimension, bad bounds, ...).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Linear algebra gave up (factorization failed even after regularization).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A run configuration is inconsistent or references something unknown.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A black-box evaluation failed; carries the offending design point.
struct EvaluationError : std::runtime_error {
    Vector design;
    EvaluationError(const std::string& msg, Vector x)
        : std::runtime_error(msg), design(std::move(x)) {}
};

}  // namespace mobo
