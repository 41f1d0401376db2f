#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dflsq/types.hpp"

namespace dflsq {

enum class NoiseKind { none, mult_gaussian, add_gaussian, add_chi2 };

NoiseKind noise_kind_from_string(const std::string& s);
std::string to_string(NoiseKind k);

/// Stochastic perturbation applied to residual vectors. Draws are i.i.d. per
/// component and per call, reproducible from (seed, call ordinal).
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    bool deterministic() const { return kind == NoiseKind::none || sigma == 0.0; }
    /// Perturb r in place; ordinal is the 1-based evaluation index.
    void apply(Vector& r, std::uint64_t ordinal) const;
};

/// Counts full residual-vector evaluations against a hard cap.
struct EvalBudget {
    int max_evals = 0;
    int used = 0;

    bool exhausted() const { return used >= max_evals; }
};

/// A least-squares test problem: residual map, start point, bounds and the
/// reference values used by the solved-threshold test.
struct Problem {
    std::string name;
    int n = 0;
    int m = 0;
    std::function<Vector(const Vector&)> residual;
    Vector x0;
    Vector lower;  // -inf where unbounded
    Vector upper;  // +inf where unbounded
    double two_f0 = 0.0;    // ||r(x0)||^2
    double two_fstar = 0.0; // ||r(x*)||^2

    bool bounded() const;
};

/// Noise-perturbed, budget-counted residual evaluation.
/// Throws BudgetExhausted before evaluating when the budget is spent, and
/// EvalFailure if the residual comes back non-finite.
Vector evaluate(const Problem& problem, const Vector& x, const NoiseSpec& noise, EvalBudget& budget);

/// f = 0.5 * ||r||^2
double objective(const Vector& rvec);

/// Problem ids accepted by make_problem / build_suite, in registry order.
std::vector<std::string> suite_names();

/// Construct a registered problem. dim applies only to the variable-dimension
/// integral-equation problem (default 100); passing it for a fixed-size
/// problem is a ConfigError, as is an unknown name.
Problem make_problem(const std::string& name, std::optional<int> dim = std::nullopt);

std::vector<Problem> build_suite(const std::vector<std::string>& names);

/// The full implemented suite.
std::vector<Problem> build_suite();

}  // namespace dflsq
