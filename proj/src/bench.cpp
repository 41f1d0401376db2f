#include "dflsq/bench.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace dflsq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

void write_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, path);
}

std::string sigma_tag(double sigma) {
    std::ostringstream out;
    out << sigma;
    std::string s = out.str();
    for (char& c : s) {
        if (c == '.' || c == '-' || c == '+') c = '_';
    }
    return s;
}

std::string solver_label(Mode mode, NoiseKind kind, double sigma) {
    if (kind == NoiseKind::none || sigma == 0.0) return to_string(mode);
    return to_string(mode) + "__" + to_string(kind) + "__sigma" + sigma_tag(sigma);
}

struct Cell {
    std::string problem;
    Mode mode = Mode::practical;
    NoiseKind kind = NoiseKind::none;
    double sigma = 0.0;
    int run = 0;
    std::uint64_t seed = 0;
    std::string file;
};

}  // namespace

void BenchPlan::validate() const {
    if (problems.empty()) throw ConfigError("bench: no problems");
    if (modes.empty()) throw ConfigError("bench: no modes");
    if (noise_kinds.empty()) throw ConfigError("bench: no noise kinds");
    if (runs < 1) throw ConfigError("bench: runs must be >= 1");
    if (budget_gradients < 1) throw ConfigError("bench: budget must be >= 1 gradient");
}

void write_eval_log(const fs::path& path, const EvalLog& log,
                    const std::vector<EvalRecord>& trace) {
    std::ostringstream out;
    json meta;
    meta["meta"] = {{"problem", log.problem}, {"solver", log.solver}, {"run", log.run},
                    {"n", log.dim},           {"two_f0", log.two_f0}, {"two_fstar", log.two_fstar}};
    out << meta.dump() << '\n';
    for (const EvalRecord& rec : trace) {
        json line;
        line["eval_index"] = rec.eval_index;
        line["point"] = vector_to_json(rec.x);
        line["f_noisy"] = rec.f_noisy;
        line["f_true"] = rec.f_true;
        out << line.dump() << '\n';
    }
    write_atomic(path, out.str());
}

EvalLog read_eval_log(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EvalLog log;
    std::string line;
    bool have_meta = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (!have_meta) {
            if (!j.contains("meta")) throw std::runtime_error(path.string() + ": missing meta record");
            const json& m = j["meta"];
            log.problem = m.at("problem").get<std::string>();
            log.solver = m.at("solver").get<std::string>();
            log.run = m.at("run").get<int>();
            log.dim = m.at("n").get<int>();
            log.two_f0 = m.at("two_f0").get<double>();
            log.two_fstar = m.at("two_fstar").get<double>();
            have_meta = true;
            continue;
        }
        log.f_true.push_back(j.at("f_true").get<double>());
    }
    if (!have_meta) throw std::runtime_error(path.string() + ": empty log");
    return log;
}

std::string result_to_json(const Problem& problem, const SolverConfig& config,
                           const NoiseSpec& noise, const SolveResult& result) {
    json j;
    j["problem"] = problem.name;
    j["n"] = problem.n;
    j["m"] = problem.m;
    j["mode"] = to_string(config.mode);
    j["noise"] = {{"kind", to_string(noise.kind)}, {"sigma", noise.sigma}, {"seed", noise.seed}};
    j["rho_end"] = config.rho_end;
    j["max_evals"] = config.max_evals;
    j["termination"] = to_string(result.termination);
    j["f_final"] = result.f_final;
    j["x_final"] = vector_to_json(result.x_final);
    j["evals_used"] = result.evals_used;
    j["iterations"] = result.iterations;
    j["stats"] = {{"trs_calls", result.stats.trs_calls},
                  {"cauchy_violations", result.stats.cauchy_violations},
                  {"step_bound_checks", result.stats.step_bound_checks},
                  {"step_bound_violations", result.stats.step_bound_violations},
                  {"safety_phases", result.stats.safety_phases},
                  {"criticality_phases", result.stats.criticality_phases},
                  {"criticality_capped", result.stats.criticality_capped},
                  {"geometry_steps", result.stats.geometry_steps},
                  {"simplex_rebuilds", result.stats.simplex_rebuilds},
                  {"base_shifts", result.stats.base_shifts},
                  {"peak_model_bytes", result.stats.peak_model_bytes}};
    if (!result.geometry.empty()) {
        json snaps = json::array();
        for (const GeometrySnapshot& snap : result.geometry) {
            json s;
            s["iteration"] = snap.iteration;
            s["delta"] = snap.delta;
            s["w_condition"] = std::isfinite(snap.w_condition) ? json(snap.w_condition)
                                                               : json("inf");
            json pts = json::array();
            for (int t = 0; t < snap.points.cols(); ++t)
                pts.push_back(vector_to_json(snap.points.col(t)));
            s["points"] = pts;
            json lambdas = json::array();
            for (int t = 0; t < snap.lambda_values.size(); ++t) {
                const double lv = snap.lambda_values[t];
                lambdas.push_back(std::isfinite(lv) ? json(lv) : json("inf"));
            }
            s["lambda"] = lambdas;
            snaps.push_back(std::move(s));
        }
        j["geometry"] = std::move(snaps);
    }
    return j.dump(2);
}

std::string registry_manifest_json() {
    json arr = json::array();
    for (const Problem& p : build_suite()) {
        arr.push_back({{"name", p.name},
                       {"n", p.n},
                       {"m", p.m},
                       {"two_f0", p.two_f0},
                       {"two_fstar", p.two_fstar}});
    }
    return arr.dump(2);
}

int run_bench(const BenchPlan& plan, const fs::path& out_dir) {
    plan.validate();
    fs::create_directories(out_dir);

    std::vector<Cell> cells;
    for (const std::string& name : plan.problems) {
        for (const Mode mode : plan.modes) {
            for (const NoiseKind kind : plan.noise_kinds) {
                const std::vector<double> sigmas =
                    kind == NoiseKind::none ? std::vector<double>{0.0} : plan.sigmas;
                for (const double sigma : sigmas) {
                    const int runs = kind == NoiseKind::none ? 1 : plan.runs;
                    for (int run = 0; run < runs; ++run) {
                        Cell cell;
                        cell.problem = name;
                        cell.mode = mode;
                        cell.kind = kind;
                        cell.sigma = sigma;
                        cell.run = run;
                        cell.seed = plan.base_seed + static_cast<std::uint64_t>(run);
                        cell.file = name + "__" + solver_label(mode, kind, sigma) + "__run" +
                                    std::to_string(run) + ".jsonl";
                        cells.push_back(std::move(cell));
                    }
                }
            }
        }
    }

    std::vector<json> entries(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<int> completed{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& cell = cells[i];
            json entry;
            entry["problem"] = cell.problem;
            entry["solver"] = solver_label(cell.mode, cell.kind, cell.sigma);
            entry["noise"] = to_string(cell.kind);
            entry["sigma"] = cell.sigma;
            entry["run"] = cell.run;
            entry["seed"] = cell.seed;
            entry["file"] = cell.file;
            try {
                const Problem problem = make_problem(cell.problem);
                SolverConfig config;
                config.mode = cell.mode;
                config.rho_end = plan.rho_end;
                config.max_evals = plan.budget_gradients * (problem.n + 1);
                NoiseSpec noise{cell.kind, cell.sigma, cell.seed};
                const SolveResult result = solve(problem, config, noise);
                EvalLog log;
                log.problem = cell.problem;
                log.solver = entry["solver"].get<std::string>();
                log.run = cell.run;
                log.dim = problem.n;
                log.two_f0 = problem.two_f0;
                log.two_fstar = problem.two_fstar;
                write_eval_log(out_dir / cell.file, log, result.trace);
                entry["status"] = "ok";
                entry["termination"] = to_string(result.termination);
                entry["evals_used"] = result.evals_used;
                entry["f_final"] = result.f_final;
                completed.fetch_add(1);
            } catch (const std::exception& e) {
                entry["status"] = "failed";
                entry["error"] = e.what();
            }
            entries[i] = std::move(entry);
        }
    };

    int workers = plan.workers > 0 ? plan.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();

    json manifest;
    manifest["budget_gradients"] = plan.budget_gradients;
    manifest["runs"] = plan.runs;
    manifest["base_seed"] = plan.base_seed;
    manifest["rho_end"] = plan.rho_end;
    manifest["cells"] = json::array();
    for (json& entry : entries) manifest["cells"].push_back(std::move(entry));
    write_atomic(out_dir / "manifest.json", manifest.dump(2));
    return completed.load();
}

std::vector<ProfileTable> profiles_from_logs(const fs::path& log_dir,
                                             const std::vector<double>& taus,
                                             int budget_gradients) {
    std::vector<EvalLog> logs;
    for (const auto& entry : fs::directory_iterator(log_dir)) {
        if (entry.path().extension() == ".jsonl") logs.push_back(read_eval_log(entry.path()));
    }
    if (logs.empty()) throw ConfigError("profile: no .jsonl logs in " + log_dir.string());
    std::sort(logs.begin(), logs.end(), [](const EvalLog& a, const EvalLog& b) {
        return std::tie(a.solver, a.problem, a.run) < std::tie(b.solver, b.problem, b.run);
    });

    std::set<std::string> solvers;
    std::set<int> runs;
    std::set<std::string> problems;
    std::map<std::string, int> dims;
    for (const EvalLog& log : logs) {
        solvers.insert(log.solver);
        runs.insert(log.run);
        problems.insert(log.problem);
        dims[log.problem] = log.dim;
    }

    std::vector<ProfileTable> out;
    for (const double tau : taus) {
        // N_p per (solver, run, problem); absent cells never solve
        std::map<std::string, std::map<int, std::map<std::string, std::int64_t>>> evals;
        for (const std::string& solver : solvers) {
            for (const int run : runs) {
                for (const std::string& problem : problems) {
                    evals[solver][run][problem] = kNeverSolved;
                }
            }
        }
        for (const EvalLog& log : logs) {
            evals[log.solver][log.run][log.problem] = evals_to_solve(log, tau);
        }
        std::map<std::string, std::int64_t> reference;
        for (const std::string& problem : problems) reference[problem] = kNeverSolved;
        for (const auto& [solver, by_run] : evals) {
            for (const auto& [run, by_problem] : by_run) {
                for (const auto& [problem, np] : by_problem) {
                    reference[problem] = std::min(reference[problem], np);
                }
            }
        }
        for (const std::string& solver : solvers) {
            std::vector<ProfileTable> data_tables, perf_tables;
            for (const int run : runs) {
                ProfileTable d = data_profile(evals[solver][run], dims, budget_gradients);
                d.solver = solver;
                d.tau = tau;
                data_tables.push_back(std::move(d));
                auto perf = performance_profile({{solver, evals[solver][run]}}, reference);
                ProfileTable p = std::move(perf.at(solver));
                p.tau = tau;
                perf_tables.push_back(std::move(p));
            }
            out.push_back(average_profiles(data_tables));
            out.push_back(average_profiles(perf_tables));
        }
    }
    return out;
}

}  // namespace dflsq
