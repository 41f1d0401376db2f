#include <random>
#include <sstream>

#include "doctest.h"
#include "dflsq/profiles.hpp"

using namespace dflsq;

namespace {

// independent recount of a data-profile sample
double recount_data(const std::map<std::string, std::int64_t>& evals,
                    const std::map<std::string, int>& dims, double alpha) {
    int hit = 0;
    for (const auto& [name, np] : evals) {
        if (np != kNeverSolved && static_cast<double>(np) <= alpha * (dims.at(name) + 1)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(evals.size());
}

double recount_perf(const std::map<std::string, std::int64_t>& evals,
                    const std::map<std::string, std::int64_t>& reference, double alpha) {
    int hit = 0;
    for (const auto& [name, np] : evals) {
        const auto star = reference.at(name);
        if (np != kNeverSolved && star != kNeverSolved &&
            static_cast<double>(np) <= alpha * static_cast<double>(star)) {
            ++hit;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(evals.size());
}

}  // namespace

TEST_SUITE("profiles") {

TEST_CASE("evals_to_solve basics") {
    // threshold met immediately
    CHECK(evals_to_solve({0.0, 1.0}, 2.0, 0.0, 1e-1) == 1);
    // never met
    CHECK(evals_to_solve({5.0, 4.0, 3.0}, 10.0, 0.0, 1e-5) == kNeverSolved);
    // running best, not the raw sequence
    CHECK(evals_to_solve({5.0, 0.5, 3.0}, 12.0, 0.0, 1e-1) == 2);
}

TEST_CASE("rosenbrock threshold arithmetic") {
    // two_f0 = 24.2, two_fstar = 0, tau = 1e-1: threshold f = 1.21
    const std::vector<double> trace = {12.1, 5.0, 1.3, 1.2099, 0.4};
    CHECK(evals_to_solve(trace, 24.2, 0.0, 1e-1) == 4);
}

TEST_CASE("evals_to_solve ignores anything after the crossing") {
    std::vector<double> trace = {5.0, 1.0, 0.2};
    const auto base = evals_to_solve(trace, 10.0, 0.0, 0.25);
    trace.push_back(100.0);
    trace.push_back(1e-9);
    CHECK(evals_to_solve(trace, 10.0, 0.0, 0.25) == base);
}

TEST_CASE("threshold is monotone in tau") {
    const std::vector<double> trace = {6.0, 3.0, 1.5, 0.7, 0.3, 0.1, 0.04, 0.015, 0.006};
    std::int64_t prev = 0;
    for (const double tau : {0.5, 1e-1, 1e-2}) {
        const auto np = evals_to_solve(trace, 12.0, 0.0, tau);
        CHECK(np >= prev);
        prev = np;
    }
}

TEST_CASE("single-problem data profile steps at the advertised budget") {
    const std::map<std::string, std::int64_t> evals = {{"p", 6}};
    const std::map<std::string, int> dims = {{"p", 2}};
    const ProfileTable table = data_profile(evals, dims, 10);
    for (std::size_t i = 0; i < table.alpha.size(); ++i) {
        const double expect = table.alpha[i] >= 2.0 ? 1.0 : 0.0;
        CHECK(table.proportion[i] == expect);
    }
}

TEST_CASE("unsolved problems contribute an identically zero profile") {
    const std::map<std::string, std::int64_t> evals = {{"a", kNeverSolved}, {"b", kNeverSolved}};
    const std::map<std::string, int> dims = {{"a", 3}, {"b", 5}};
    const ProfileTable table = data_profile(evals, dims, 50);
    for (const double p : table.proportion) CHECK(p == 0.0);
}

TEST_CASE("randomized data profiles match the independent recount") {
    std::mt19937_64 gen(4096);
    std::uniform_int_distribution<int> ndist(1, 12), npdist(1, 2000);
    for (int trial = 0; trial < 20; ++trial) {
        std::map<std::string, std::int64_t> evals;
        std::map<std::string, int> dims;
        for (int p = 0; p < 20; ++p) {
            const std::string name = "p" + std::to_string(p);
            dims[name] = ndist(gen);
            evals[name] = (gen() % 5 == 0) ? kNeverSolved : npdist(gen);
        }
        const ProfileTable table = data_profile(evals, dims, 100);
        for (std::size_t i = 0; i < table.alpha.size(); ++i) {
            CHECK(table.proportion[i] == recount_data(evals, dims, table.alpha[i]));
        }
        // monotone step function in [0, 1]
        for (std::size_t i = 1; i < table.proportion.size(); ++i) {
            CHECK(table.proportion[i] >= table.proportion[i - 1]);
            CHECK(table.proportion[i] <= 1.0);
        }
    }
}

TEST_CASE("single-solver performance profile is flat at its solved fraction") {
    std::map<std::string, std::map<std::string, std::int64_t>> by_solver;
    by_solver["s"] = {{"a", 10}, {"b", 20}, {"c", kNeverSolved}};
    const auto tables = performance_profile(by_solver);
    const ProfileTable& t = tables.at("s");
    for (const double p : t.proportion) CHECK(p == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("strictly dominated solver scores zero at alpha = 1") {
    std::map<std::string, std::map<std::string, std::int64_t>> by_solver;
    by_solver["fast"] = {{"a", 5}, {"b", 8}};
    by_solver["slow"] = {{"a", 9}, {"b", 30}};
    const auto tables = performance_profile(by_solver);
    CHECK(tables.at("fast").proportion.front() == 1.0);
    CHECK(tables.at("slow").proportion.front() == 0.0);
    // the slow solver catches up once alpha exceeds its worst ratio
    CHECK(tables.at("slow").proportion.back() == 1.0);
}

TEST_CASE("randomized performance profiles match the independent recount") {
    std::mt19937_64 gen(777);
    std::uniform_int_distribution<int> npdist(1, 500);
    for (int trial = 0; trial < 20; ++trial) {
        std::map<std::string, std::map<std::string, std::int64_t>> by_solver;
        for (const std::string solver : {"s1", "s2", "s3"}) {
            for (int p = 0; p < 15; ++p) {
                const std::string name = "p" + std::to_string(p);
                by_solver[solver][name] = (gen() % 6 == 0) ? kNeverSolved : npdist(gen);
            }
        }
        std::map<std::string, std::int64_t> reference;
        for (const auto& [solver, evals] : by_solver) {
            for (const auto& [name, np] : evals) {
                auto it = reference.find(name);
                if (it == reference.end() || np < it->second) reference[name] = np;
            }
        }
        const auto tables = performance_profile(by_solver);
        for (const auto& [solver, table] : tables) {
            for (std::size_t i = 0; i < table.alpha.size(); ++i) {
                CHECK(table.proportion[i] ==
                      recount_perf(by_solver.at(solver), reference, table.alpha[i]));
            }
        }
    }
}

TEST_CASE("averaging profiles") {
    ProfileTable a;
    a.kind = ProfileKind::data;
    a.alpha = {0.0, 0.5, 1.0};
    a.proportion = {0.0, 0.0, 1.0};
    ProfileTable b = a;
    b.proportion = {1.0, 1.0, 1.0};

    SUBCASE("identical tables are unchanged") {
        const ProfileTable avg = average_profiles(std::vector<ProfileTable>(10, a));
        CHECK(avg.proportion == a.proportion);
        CHECK(avg.runs_averaged == 10);
    }
    SUBCASE("pointwise mean") {
        const ProfileTable avg = average_profiles({a, b});
        CHECK(avg.proportion[0] == 0.5);
        CHECK(avg.proportion[2] == 1.0);
    }
    SUBCASE("mismatched grids are rejected") {
        ProfileTable c = a;
        c.alpha = {0.0, 1.0, 2.0};
        CHECK_THROWS_AS(average_profiles({a, c}), ConfigError);
    }
}

TEST_CASE("csv output is ordered and complete") {
    ProfileTable a;
    a.kind = ProfileKind::data;
    a.solver = "zeta";
    a.tau = 1e-1;
    a.alpha = {0.0, 0.5};
    a.proportion = {0.0, 1.0};
    ProfileTable b = a;
    b.solver = "alpha";
    const std::string csv = profiles_to_csv({a, b});
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "kind,solver,tau,alpha,proportion,runs_averaged");
    std::getline(in, line);
    CHECK(line.find("data,alpha,") == 0);  // sorted by solver within a kind
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("empty inputs are configuration errors") {
    CHECK_THROWS_AS(data_profile({}, {}, 10), ConfigError);
    CHECK_THROWS_AS(performance_profile({}), ConfigError);
    CHECK_THROWS_AS(average_profiles({}), ConfigError);
}

}  // TEST_SUITE
