#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dflsq/bench.hpp"
#include "dflsq/problems.hpp"
#include "dflsq/profiles.hpp"
#include "dflsq/solver.hpp"

namespace fs = std::filesystem;
using namespace dflsq;

namespace {

// relative output paths land under $DFLSQ_OUT_ROOT when it is set
fs::path resolve_out(const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv("DFLSQ_OUT_ROOT")) return fs::path(root) / p;
    return p;
}

void write_file(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

std::vector<std::string> expand_problems(std::vector<std::string> names) {
    if (names.size() == 1 && names[0] == "all") return suite_names();
    return names;
}

int cmd_solve(const std::string& problem_name, std::optional<int> dim, const std::string& mode,
              const std::string& noise_kind, double sigma, std::uint64_t seed,
              int budget_gradients, double rho_end, const std::string& out_path,
              std::string log_path, bool dump_geometry) {
    const Problem problem = make_problem(problem_name, dim);
    SolverConfig config;
    config.mode = mode_from_string(mode);
    config.rho_end = rho_end;
    config.max_evals = budget_gradients * (problem.n + 1);
    config.dump_geometry = dump_geometry;
    NoiseSpec noise{noise_kind_from_string(noise_kind), sigma, seed};

    const SolveResult result = solve(problem, config, noise);

    const fs::path out = resolve_out(out_path);
    write_file(out, result_to_json(problem, config, noise, result));
    if (log_path.empty()) log_path = (fs::path(out_path).replace_extension(".jsonl")).string();
    EvalLog log;
    log.problem = problem.name;
    log.solver = to_string(config.mode);
    log.run = 0;
    log.dim = problem.n;
    log.two_f0 = problem.two_f0;
    log.two_fstar = problem.two_fstar;
    const fs::path logp = resolve_out(log_path);
    if (logp.has_parent_path()) fs::create_directories(logp.parent_path());
    write_eval_log(logp, log, result.trace);

    std::cout << "termination=" << to_string(result.termination) << " f=" << result.f_final
              << " evals=" << result.evals_used << " iters=" << result.iterations << "\n";
    return result.termination == Termination::eval_failure ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"derivative-free Gauss-Newton least-squares solver and benchmark harness"};
    app.require_subcommand(1);

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "run a single solve");
    std::string problem_name, mode = "practical", noise_kind = "none";
    std::string out_path = "result.json", log_path;
    double sigma = 1e-2, rho_end = 1e-10;
    std::uint64_t seed = 0;
    int budget_gradients = 200;
    int dim = 0;
    bool dump_geometry = false;
    solve_cmd->add_option("--problem", problem_name, "problem id")->required();
    solve_cmd->add_option("--dim", dim, "dimension (variable-dimension problems only)");
    solve_cmd->add_option("--mode", mode, "practical|faithful");
    solve_cmd->add_option("--noise", noise_kind, "none|mult_gaussian|add_gaussian|add_chi2");
    solve_cmd->add_option("--sigma", sigma, "noise level");
    solve_cmd->add_option("--seed", seed, "noise seed");
    solve_cmd->add_option("--budget-gradients", budget_gradients, "budget in simplex gradients");
    solve_cmd->add_option("--rho-end", rho_end, "final trust-region radius");
    solve_cmd->add_option("--out", out_path, "result JSON path");
    solve_cmd->add_option("--log", log_path, "evaluation log JSONL path");
    solve_cmd->add_flag("--dump-geometry", dump_geometry, "record per-iteration geometry");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark sweep");
    std::vector<std::string> bench_problems = {"all"};
    std::vector<std::string> bench_modes = {"practical"};
    std::vector<std::string> bench_noise = {"none"};
    std::vector<double> bench_sigmas = {1e-2};
    std::string bench_out = "bench_logs";
    int bench_budget = 200, bench_runs = 10, bench_workers = 0;
    std::uint64_t bench_seed = 0;
    double bench_rho_end = 1e-10;
    bench_cmd->add_option("--problems", bench_problems, "problem ids or 'all'");
    bench_cmd->add_option("--modes", bench_modes, "solver modes");
    bench_cmd->add_option("--noise", bench_noise, "noise kinds");
    bench_cmd->add_option("--sigmas", bench_sigmas, "noise levels");
    bench_cmd->add_option("--budget-gradients", bench_budget, "budget in simplex gradients");
    bench_cmd->add_option("--runs", bench_runs, "runs per noisy cell");
    bench_cmd->add_option("--seed", bench_seed, "base seed (run r uses seed+r)");
    bench_cmd->add_option("--rho-end", bench_rho_end, "final trust-region radius");
    bench_cmd->add_option("--workers", bench_workers, "worker threads (0: hardware)");
    bench_cmd->add_option("--out-dir", bench_out, "log output directory");

    // profile
    auto* profile_cmd = app.add_subcommand("profile", "compute profiles from logs");
    std::string profile_logs, profile_out = "profiles.csv";
    std::vector<double> taus = {1e-5};
    int profile_budget = 200;
    profile_cmd->add_option("--logs", profile_logs, "directory of EvalLog JSONL files")->required();
    profile_cmd->add_option("--tau", taus, "accuracy levels");
    profile_cmd->add_option("--budget-gradients", profile_budget, "data-profile grid extent");
    profile_cmd->add_option("--out", profile_out, "CSV output path");

    // manifest
    auto* manifest_cmd = app.add_subcommand("manifest", "emit the problem registry as JSON");
    std::string manifest_out;
    manifest_cmd->add_option("--out", manifest_out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (solve_cmd->parsed()) {
            std::optional<int> dim_opt;
            if (dim > 0) dim_opt = dim;
            return cmd_solve(problem_name, dim_opt, mode, noise_kind, sigma, seed,
                             budget_gradients, rho_end, out_path, log_path, dump_geometry);
        }
        if (bench_cmd->parsed()) {
            BenchPlan plan;
            plan.problems = expand_problems(bench_problems);
            plan.modes.clear();
            for (const auto& m : bench_modes) plan.modes.push_back(mode_from_string(m));
            plan.noise_kinds.clear();
            for (const auto& k : bench_noise) plan.noise_kinds.push_back(noise_kind_from_string(k));
            plan.sigmas = bench_sigmas;
            plan.budget_gradients = bench_budget;
            plan.runs = bench_runs;
            plan.base_seed = bench_seed;
            plan.rho_end = bench_rho_end;
            plan.workers = bench_workers;
            const int completed = run_bench(plan, resolve_out(bench_out));
            std::cout << "completed " << completed << " cells -> " << resolve_out(bench_out)
                      << "\n";
            return 0;
        }
        if (profile_cmd->parsed()) {
            const auto tables = profiles_from_logs(resolve_out(profile_logs), taus, profile_budget);
            write_file(resolve_out(profile_out), profiles_to_csv(tables));
            std::cout << "wrote " << resolve_out(profile_out) << "\n";
            return 0;
        }
        if (manifest_cmd->parsed()) {
            const std::string manifest = registry_manifest_json();
            if (manifest_out.empty()) {
                std::cout << manifest << "\n";
            } else {
                write_file(resolve_out(manifest_out), manifest);
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
