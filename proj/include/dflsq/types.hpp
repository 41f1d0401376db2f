#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace dflsq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Interpolation matrix is numerically singular; caller must repair geometry.
struct DegenerateGeometry : std::runtime_error {
    explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation budget exhausted.
struct BudgetExhausted : std::runtime_error {
    BudgetExhausted() : std::runtime_error("evaluation budget exhausted") {}
};

/// Residual evaluation produced a non-finite value.
struct EvalFailure : std::runtime_error {
    explicit EvalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration (unknown problem id, bad parameter, ...).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace dflsq
