#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dflsq/problems.hpp"
#include "dflsq/profiles.hpp"
#include "dflsq/solver.hpp"

namespace dflsq {

/// One benchmark sweep: every (problem, mode, noise, sigma) cell is run
/// `runs` times with seeds base_seed + run_index.
struct BenchPlan {
    std::vector<std::string> problems;
    std::vector<Mode> modes = {Mode::practical};
    std::vector<NoiseKind> noise_kinds = {NoiseKind::none};
    std::vector<double> sigmas = {1e-2};
    int budget_gradients = 200;
    int runs = 1;
    std::uint64_t base_seed = 0;
    double rho_end = 1e-10;
    int workers = 0;  // 0: hardware concurrency

    void validate() const;
};

/// Per-evaluation JSONL log: a meta record followed by one record
/// {eval_index, point, f_noisy, f_true} per evaluation.
void write_eval_log(const std::filesystem::path& path, const EvalLog& log,
                    const std::vector<EvalRecord>& trace);
EvalLog read_eval_log(const std::filesystem::path& path);

/// Serialize a solve outcome (termination, finals, stats, optional geometry).
std::string result_to_json(const Problem& problem, const SolverConfig& config,
                           const NoiseSpec& noise, const SolveResult& result);

/// JSON manifest of the problem registry: name, n, m, 2f(x0), 2f*.
std::string registry_manifest_json();

/// Run the sweep, writing one EvalLog per cell-run plus manifest.json into
/// out_dir. Cells that fail are recorded in the manifest and do not stop the
/// sweep. Files are written atomically (temp file + rename).
/// Returns the number of cells that completed.
int run_bench(const BenchPlan& plan, const std::filesystem::path& out_dir);

/// Compute data (per solver label) and performance profiles from a directory
/// of EvalLog files, averaging over run indices, for each tau.
std::vector<ProfileTable> profiles_from_logs(const std::filesystem::path& log_dir,
                                             const std::vector<double>& taus,
                                             int budget_gradients);

}  // namespace dflsq
