#include "dflsq/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace dflsq {

namespace {

// fixed geometric grid for performance profiles: 1, 1.1, 1.1^2, ...
std::vector<double> performance_alpha_grid() {
    std::vector<double> grid;
    double a = 1.0;
    while (a <= 1.0e5) {
        grid.push_back(a);
        a *= 1.1;
    }
    return grid;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::string to_string(ProfileKind k) {
    return k == ProfileKind::data ? "data" : "performance";
}

std::int64_t evals_to_solve(const std::vector<double>& f_true, double two_f0, double two_fstar,
                            double tau) {
    const double fstar = 0.5 * two_fstar;
    const double f0 = 0.5 * two_f0;
    const double threshold = fstar + tau * (f0 - fstar);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f_true.size(); ++i) {
        best = std::min(best, f_true[i]);
        if (best <= threshold) return static_cast<std::int64_t>(i) + 1;
    }
    return kNeverSolved;
}

std::int64_t evals_to_solve(const EvalLog& log, double tau) {
    return evals_to_solve(log.f_true, log.two_f0, log.two_fstar, tau);
}

ProfileTable data_profile(const std::map<std::string, std::int64_t>& evals_needed,
                          const std::map<std::string, int>& dims, int budget_gradients) {
    if (evals_needed.empty()) throw ConfigError("data_profile: no problems");
    if (budget_gradients <= 0) throw ConfigError("data_profile: budget must be positive");
    ProfileTable table;
    table.kind = ProfileKind::data;
    const double total = static_cast<double>(evals_needed.size());
    for (int j = 0; j <= 2 * budget_gradients; ++j) {
        const double alpha = 0.5 * j;
        int count = 0;
        for (const auto& [name, np] : evals_needed) {
            if (np == kNeverSolved) continue;
            const auto it = dims.find(name);
            if (it == dims.end()) throw ConfigError("data_profile: missing dimension for " + name);
            if (static_cast<double>(np) <= alpha * (it->second + 1)) ++count;
        }
        table.alpha.push_back(alpha);
        table.proportion.push_back(count / total);
    }
    return table;
}

std::map<std::string, ProfileTable> performance_profile(
    const std::map<std::string, std::map<std::string, std::int64_t>>& evals_by_solver) {
    std::map<std::string, std::int64_t> reference;
    for (const auto& [solver, evals] : evals_by_solver) {
        for (const auto& [name, np] : evals) {
            auto it = reference.find(name);
            if (it == reference.end() || np < it->second) reference[name] = np;
        }
    }
    return performance_profile(evals_by_solver, reference);
}

std::map<std::string, ProfileTable> performance_profile(
    const std::map<std::string, std::map<std::string, std::int64_t>>& evals_by_solver,
    const std::map<std::string, std::int64_t>& reference) {
    if (evals_by_solver.empty()) throw ConfigError("performance_profile: no solvers");
    const std::vector<double> grid = performance_alpha_grid();
    std::map<std::string, ProfileTable> out;
    for (const auto& [solver, evals] : evals_by_solver) {
        if (evals.empty()) throw ConfigError("performance_profile: no problems");
        ProfileTable table;
        table.kind = ProfileKind::performance;
        table.solver = solver;
        const double total = static_cast<double>(evals.size());
        for (const double alpha : grid) {
            int count = 0;
            for (const auto& [name, np] : evals) {
                if (np == kNeverSolved) continue;
                const auto it = reference.find(name);
                if (it == reference.end() || it->second == kNeverSolved) continue;
                if (static_cast<double>(np) <= alpha * static_cast<double>(it->second)) ++count;
            }
            table.alpha.push_back(alpha);
            table.proportion.push_back(count / total);
        }
        out[solver] = std::move(table);
    }
    return out;
}

ProfileTable average_profiles(const std::vector<ProfileTable>& tables) {
    if (tables.empty()) throw ConfigError("average_profiles: nothing to average");
    ProfileTable out = tables.front();
    for (std::size_t i = 1; i < tables.size(); ++i) {
        const ProfileTable& t = tables[i];
        if (t.kind != out.kind || t.tau != out.tau || t.alpha != out.alpha) {
            throw ConfigError("average_profiles: mismatched grids");
        }
        for (std::size_t j = 0; j < out.proportion.size(); ++j) {
            out.proportion[j] += t.proportion[j];
        }
    }
    for (double& p : out.proportion) p /= static_cast<double>(tables.size());
    out.runs_averaged = static_cast<int>(tables.size());
    return out;
}

std::string profiles_to_csv(const std::vector<ProfileTable>& tables) {
    std::vector<const ProfileTable*> order;
    order.reserve(tables.size());
    for (const auto& t : tables) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](const ProfileTable* a, const ProfileTable* b) {
        if (a->kind != b->kind) return a->kind < b->kind;
        if (a->solver != b->solver) return a->solver < b->solver;
        return a->tau < b->tau;
    });
    std::ostringstream out;
    out << "kind,solver,tau,alpha,proportion,runs_averaged\n";
    for (const ProfileTable* t : order) {
        for (std::size_t j = 0; j < t->alpha.size(); ++j) {
            out << to_string(t->kind) << ',' << t->solver << ',' << format_double(t->tau) << ','
                << format_double(t->alpha[j]) << ',' << format_double(t->proportion[j]) << ','
                << t->runs_averaged << '\n';
        }
    }
    return out.str();
}

}  // namespace dflsq
