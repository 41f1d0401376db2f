#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dflsq/interp.hpp"
#include "dflsq/models.hpp"
#include "dflsq/problems.hpp"
#include "dflsq/subproblems.hpp"
#include "dflsq/types.hpp"

namespace dflsq {

enum class Mode { faithful, practical };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

enum class Termination { small_objective, small_rho, budget, eval_failure };
std::string to_string(Termination t);

struct SolverConfig {
    Mode mode = Mode::practical;
    double delta0 = -1.0;   // <= 0: use 0.1 * max(||x0||_inf, 1)
    double rho_end = 1e-10;
    double delta_max = 1e10;
    double gamma_dec = 0.5;
    double gamma_inc = 2.0;
    double gamma_inc_hat = 4.0;
    double eta1 = 0.1;
    double eta2 = 0.7;
    double alpha1 = 0.1;
    double alpha2 = 0.5;
    double omega_s = 0.1;
    double gamma_s = 0.5;
    // criticality controls (faithful mode)
    double eps_c = 1e-2;
    double mu = 1.0;
    double omega_c = 0.5;
    double lambda_poise = 10.0;
    int criticality_cap = 50;
    // geometry controls
    double geom_dist_factor = 2.0;  // practical: repair when ||y_t - x_k|| > factor * delta
    int repair_cap_factor = 5;      // faithful: at most factor*(n+1) replacements per repair
    double base_shift_factor = 10.0;
    int max_evals = -1;  // <= 0: 200*(n+1)
    bool dump_geometry = false;

    void validate() const;  // throws ConfigError
};

struct EvalRecord {
    int eval_index = 0;  // 1-based
    Vector x;
    double f_noisy = 0.0;
    double f_true = 0.0;
};

struct SolveStats {
    long iterations = 0;
    long trs_calls = 0;
    long cauchy_violations = 0;
    long step_bound_checks = 0;
    long step_bound_violations = 0;
    long safety_phases = 0;
    long safety_rho_reductions = 0;
    long unsuccessful_rho_reductions = 0;
    long criticality_phases = 0;
    long last_criticality_passes = 0;
    double last_criticality_delta = 0.0;
    bool criticality_capped = false;
    long geometry_steps = 0;
    long simplex_rebuilds = 0;
    long base_shifts = 0;
    std::size_t peak_model_bytes = 0;
};

struct GeometrySnapshot {
    long iteration = 0;
    double delta = 0.0;
    double w_condition = 0.0;
    Matrix points;         // column t = y_t
    Vector lambda_values;  // max |L_t| over the trust ball, per point
};

struct SolveResult {
    Vector x_final;
    double f_final = 0.0;
    int evals_used = 0;
    long iterations = 0;
    Termination termination = Termination::budget;
    std::vector<EvalRecord> trace;
    SolveStats stats;
    std::vector<GeometrySnapshot> geometry;
};

/// Trust-region driver. run() executes the whole loop; initialize() + step()
/// drive it one outer iteration at a time, which the tests use to observe
/// phase behaviour.
class Solver {
public:
    Solver(Problem problem, SolverConfig config, NoiseSpec noise);
    ~Solver();
    Solver(Solver&&) noexcept;
    Solver& operator=(Solver&&) noexcept;

    SolveResult run();

    void initialize();
    bool step();  // false once terminated
    bool terminated() const;

    double delta() const;
    double rho() const;
    int evals_used() const;
    long iteration() const;
    int unsuccessful_streak() const;
    double model_gradient_norm() const;  // from the most recent model build
    double best_objective() const;       // observed (noisy) value
    const InterpolationSet& set() const;
    const SolveStats& stats() const;

    SolveResult result() const;  // snapshot; complete once terminated

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SolveResult solve(const Problem& problem, const SolverConfig& config, const NoiseSpec& noise);

/// Trust-radius update, by acceptance-ratio case.
double update_radius(double ratio, double delta, double step_norm, double rho,
                     const SolverConfig& config);

/// Three-branch lower-bound reduction schedule toward rho_end.
double reduce_rho(double rho, double rho_end, double alpha1 = 0.1);

}  // namespace dflsq
