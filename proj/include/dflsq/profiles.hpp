#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dflsq/types.hpp"

namespace dflsq {

/// Per-evaluation noiseless objective trace of one run on one problem.
struct EvalLog {
    std::string problem;
    std::string solver;
    int run = 0;
    int dim = 0;
    double two_f0 = 0.0;
    double two_fstar = 0.0;
    std::vector<double> f_true;  // f_true[i] belongs to eval_index i+1
};

/// Sentinel for "never reached the solved threshold".
inline constexpr std::int64_t kNeverSolved = std::numeric_limits<std::int64_t>::max();

enum class ProfileKind { data, performance };
std::string to_string(ProfileKind k);

struct ProfileTable {
    ProfileKind kind = ProfileKind::data;
    std::string solver;
    double tau = 0.0;
    std::vector<double> alpha;
    std::vector<double> proportion;
    int runs_averaged = 1;
};

/// Smallest 1-based evaluation index whose running-best f_true falls at or
/// below f* + tau (f(x0) - f*); kNeverSolved if the log never gets there.
std::int64_t evals_to_solve(const EvalLog& log, double tau);
std::int64_t evals_to_solve(const std::vector<double>& f_true, double two_f0, double two_fstar,
                            double tau);

/// Proportion of problems with N_p <= alpha (n_p + 1), sampled on the grid
/// alpha = 0, 0.5, 1, ..., Ng.
ProfileTable data_profile(const std::map<std::string, std::int64_t>& evals_needed,
                          const std::map<std::string, int>& dims, int budget_gradients);

/// Proportion of problems with N_p <= alpha N_p*, N_p* the minimum over
/// solvers (callers fold runs into the reference for noisy experiments).
/// Sampled on a fixed geometric alpha grid starting at 1.
std::map<std::string, ProfileTable> performance_profile(
    const std::map<std::string, std::map<std::string, std::int64_t>>& evals_by_solver);
std::map<std::string, ProfileTable> performance_profile(
    const std::map<std::string, std::map<std::string, std::int64_t>>& evals_by_solver,
    const std::map<std::string, std::int64_t>& reference);

/// Pointwise mean of tables with identical kind, tau and alpha grid.
ProfileTable average_profiles(const std::vector<ProfileTable>& tables);

/// CSV with header kind,solver,tau,alpha,proportion,runs_averaged and rows
/// ordered by (kind, solver, tau, alpha) ascending.
std::string profiles_to_csv(const std::vector<ProfileTable>& tables);

}  // namespace dflsq
