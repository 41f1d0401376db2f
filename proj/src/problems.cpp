#include "dflsq/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dflsq/rng.hpp"

namespace dflsq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector constant_vector(int n, double v) { return Vector::Constant(n, v); }

// ---- residual maps -------------------------------------------------------

Vector rosenbrock_r(const Vector& x) {
    Vector r(2);
    r[0] = 10.0 * (x[1] - x[0] * x[0]);
    r[1] = 1.0 - x[0];
    return r;
}

Vector helical_valley_r(const Vector& x) {
    double theta;
    if (x[0] > 0.0) {
        theta = std::atan(x[1] / x[0]) / (2.0 * std::numbers::pi);
    } else if (x[0] < 0.0) {
        theta = std::atan(x[1] / x[0]) / (2.0 * std::numbers::pi) + 0.5;
    } else {
        theta = x[1] >= 0.0 ? 0.25 : -0.25;
    }
    Vector r(3);
    r[0] = 10.0 * (x[2] - 10.0 * theta);
    r[1] = 10.0 * (std::hypot(x[0], x[1]) - 1.0);
    r[2] = x[2];
    return r;
}

Vector powell_singular_r(const Vector& x) {
    Vector r(4);
    r[0] = x[0] + 10.0 * x[1];
    r[1] = std::sqrt(5.0) * (x[2] - x[3]);
    r[2] = (x[1] - 2.0 * x[2]) * (x[1] - 2.0 * x[2]);
    r[3] = std::sqrt(10.0) * (x[0] - x[3]) * (x[0] - x[3]);
    return r;
}

Vector freudenstein_roth_r(const Vector& x) {
    Vector r(2);
    r[0] = -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1];
    r[1] = -29.0 + x[0] + ((x[1] + 1.0) * x[1] - 14.0) * x[1];
    return r;
}

const double kBardY[15] = {0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39,
                           0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39};

Vector bard_r(const Vector& x) {
    Vector r(15);
    for (int i = 1; i <= 15; ++i) {
        const double u = i;
        const double v = 16.0 - i;
        const double w = std::min(u, v);
        r[i - 1] = kBardY[i - 1] - (x[0] + u / (v * x[1] + w * x[2]));
    }
    return r;
}

const double kKowY[11] = {0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627,
                          0.0456, 0.0342, 0.0323, 0.0235, 0.0246};
const double kKowU[11] = {4.0000, 2.0000, 1.0000, 0.5000, 0.2500, 0.1670,
                          0.1250, 0.1000, 0.0833, 0.0714, 0.0625};

Vector kowalik_osborne_r(const Vector& x) {
    Vector r(11);
    for (int i = 0; i < 11; ++i) {
        const double u = kKowU[i];
        r[i] = kKowY[i] - x[0] * (u * u + u * x[1]) / (u * u + u * x[2] + x[3]);
    }
    return r;
}

Vector watson_r(const Vector& x) {
    const int n = static_cast<int>(x.size());
    Vector r(31);
    for (int i = 1; i <= 29; ++i) {
        const double t = i / 29.0;
        double s1 = 0.0, tp = 1.0;
        for (int j = 2; j <= n; ++j) {
            s1 += (j - 1) * x[j - 1] * tp;
            tp *= t;
        }
        double s2 = 0.0;
        tp = 1.0;
        for (int j = 1; j <= n; ++j) {
            s2 += x[j - 1] * tp;
            tp *= t;
        }
        r[i - 1] = s1 - s2 * s2 - 1.0;
    }
    r[29] = x[0];
    r[30] = x[1] - x[0] * x[0] - 1.0;
    return r;
}

Vector box3d_r(const Vector& x) {
    Vector r(10);
    for (int i = 1; i <= 10; ++i) {
        const double t = 0.1 * i;
        r[i - 1] = std::exp(-t * x[0]) - std::exp(-t * x[1]) -
                   x[2] * (std::exp(-t) - std::exp(-10.0 * t));
    }
    return r;
}

Vector brown_dennis_r(const Vector& x) {
    Vector r(20);
    for (int i = 1; i <= 20; ++i) {
        const double t = i / 5.0;
        const double a = x[0] + t * x[1] - std::exp(t);
        const double b = x[2] + x[3] * std::sin(t) - std::cos(t);
        r[i - 1] = a * a + b * b;
    }
    return r;
}

Vector chebyquad_r(const Vector& x) {
    const int n = static_cast<int>(x.size());
    Vector r = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
        // shifted Chebyshev values via the trig identity on [0,1]
        const double a = std::acos(std::clamp(2.0 * x[j] - 1.0, -1.0, 1.0));
        for (int i = 1; i <= n; ++i) r[i - 1] += std::cos(i * a);
    }
    for (int i = 1; i <= n; ++i) {
        r[i - 1] /= n;
        if (i % 2 == 0) r[i - 1] += 1.0 / (i * i - 1.0);
    }
    return r;
}

Vector brown_almost_linear_r(const Vector& x) {
    const int n = static_cast<int>(x.size());
    Vector r(n);
    const double s = x.sum();
    for (int i = 0; i < n - 1; ++i) r[i] = x[i] + s - (n + 1.0);
    r[n - 1] = x.prod() - 1.0;
    return r;
}

Vector bdqrtic_r(const Vector& x) {
    const int n = static_cast<int>(x.size());
    const int k = n - 4;
    Vector r(2 * k);
    for (int i = 0; i < k; ++i) r[i] = -4.0 * x[i] + 3.0;
    for (int i = 0; i < k; ++i) {
        r[k + i] = x[i] * x[i] + 2.0 * x[i + 1] * x[i + 1] + 3.0 * x[i + 2] * x[i + 2] +
                   4.0 * x[i + 3] * x[i + 3] + 5.0 * x[n - 1] * x[n - 1];
    }
    return r;
}

Vector cube_r(const Vector& x) {
    const int n = static_cast<int>(x.size());
    Vector r(n);
    r[0] = x[0] - 1.0;
    for (int i = 1; i < n; ++i) r[i] = 10.0 * (x[i] - x[i - 1] * x[i - 1] * x[i - 1]);
    return r;
}

// one-dimensional integral equation discretized on an n-point grid of (0,1)
Vector integreq_r(const Vector& x) {
    const int n = static_cast<int>(x.size());
    const double h = 1.0 / (n + 1);
    Vector t(n), w(n);
    for (int j = 0; j < n; ++j) {
        t[j] = (j + 1) * h;
        const double u = x[j] + t[j] + 1.0;
        w[j] = u * u * u;
    }
    Vector r(n);
    double s1 = 0.0;  // running sum of t_j * w_j for j <= i
    Vector tail(n + 1);
    tail[n] = 0.0;
    for (int j = n - 1; j >= 0; --j) tail[j] = tail[j + 1] + (1.0 - t[j]) * w[j];
    for (int i = 0; i < n; ++i) {
        s1 += t[i] * w[i];
        const double s2 = tail[i + 1];
        r[i] = x[i] + h * ((1.0 - t[i]) * s1 + t[i] * s2) / 2.0;
    }
    return r;
}

struct Entry {
    const char* name;
    int n;
    int m;
    Vector (*residual)(const Vector&);
    std::vector<double> x0;
    double two_f0;
    double two_fstar;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"rosenbrock", 2, 2, rosenbrock_r, {-1.2, 1.0}, 24.2, 0.0},
        {"rosenbrock_far", 2, 2, rosenbrock_r, {-12.0, 10.0}, 1.795769e6, 0.0},
        {"helical_valley", 3, 3, helical_valley_r, {-1.0, 0.0, 0.0}, 2500.0, 0.0},
        {"powell_singular", 4, 4, powell_singular_r, {3.0, -1.0, 0.0, 1.0}, 215.0, 0.0},
        {"freudenstein_roth", 2, 2, freudenstein_roth_r, {0.5, -2.0}, 400.5, 48.98425},
        {"bard", 3, 15, bard_r, {1.0, 1.0, 1.0}, 41.68170, 8.214877e-3},
        {"kowalik_osborne", 4, 11, kowalik_osborne_r, {0.25, 0.39, 0.415, 0.39},
         5.313172e-3, 3.075056e-4},
        {"watson6", 6, 31, watson_r, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 16.43083, 2.287670e-3},
        {"box3d", 3, 10, box3d_r, {0.0, 10.0, 20.0}, 1031.154, 0.0},
        {"brown_dennis", 4, 20, brown_dennis_r, {25.0, 5.0, -5.0, -1.0}, 7.926693e6,
         8.582220e4},
        {"chebyquad6", 6, 6, chebyquad_r,
         {1.0 / 7, 2.0 / 7, 3.0 / 7, 4.0 / 7, 5.0 / 7, 6.0 / 7}, 4.642817e-2, 0.0},
        {"brown_almost_linear", 10, 10, brown_almost_linear_r,
         {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 273.2480, 0.0},
        {"bdqrtic8", 8, 8, bdqrtic_r, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}, 904.0,
         10.23897},
        {"cube5", 5, 5, cube_r, {0.5, 0.5, 0.5, 0.5, 0.5}, 56.5, 0.0},
    };
    return entries;
}

Problem from_entry(const Entry& e) {
    Problem p;
    p.name = e.name;
    p.n = e.n;
    p.m = e.m;
    p.residual = e.residual;
    p.x0 = Eigen::Map<const Vector>(e.x0.data(), static_cast<Eigen::Index>(e.x0.size()));
    p.lower = constant_vector(e.n, -kInf);
    p.upper = constant_vector(e.n, kInf);
    p.two_f0 = e.two_f0;
    p.two_fstar = e.two_fstar;
    return p;
}

Problem make_integreq(int n) {
    if (n < 1) throw ConfigError("integreq: dimension must be positive");
    Problem p;
    p.name = "integreq";
    p.n = n;
    p.m = n;
    p.residual = integreq_r;
    const double h = 1.0 / (n + 1);
    p.x0.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = (i + 1) * h;
        p.x0[i] = t * (t - 1.0);
    }
    p.lower = constant_vector(n, -kInf);
    p.upper = constant_vector(n, kInf);
    p.two_f0 = p.residual(p.x0).squaredNorm();
    p.two_fstar = 0.0;
    return p;
}

void check_reference(const Problem& p) {
    const double v = p.residual(p.x0).squaredNorm();
    if (p.two_f0 != 0.0 && std::abs(v - p.two_f0) / p.two_f0 > 1e-6) {
        throw std::logic_error(p.name + ": ||r(x0)||^2 = " + std::to_string(v) +
                               " does not reproduce the reference " + std::to_string(p.two_f0));
    }
}

}  // namespace

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "none") return NoiseKind::none;
    if (s == "mult_gaussian") return NoiseKind::mult_gaussian;
    if (s == "add_gaussian") return NoiseKind::add_gaussian;
    if (s == "add_chi2") return NoiseKind::add_chi2;
    throw ConfigError("unknown noise kind: " + s);
}

std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::none: return "none";
        case NoiseKind::mult_gaussian: return "mult_gaussian";
        case NoiseKind::add_gaussian: return "add_gaussian";
        case NoiseKind::add_chi2: return "add_chi2";
    }
    return "none";
}

void NoiseSpec::apply(Vector& r, std::uint64_t ordinal) const {
    if (deterministic()) return;
    const auto n = static_cast<std::uint64_t>(r.size());
    switch (kind) {
        case NoiseKind::none: break;
        case NoiseKind::mult_gaussian:
            for (std::uint64_t i = 0; i < n; ++i)
                r[static_cast<Eigen::Index>(i)] *= 1.0 + sigma * rng::normal(seed, ordinal, i);
            break;
        case NoiseKind::add_gaussian:
            for (std::uint64_t i = 0; i < n; ++i)
                r[static_cast<Eigen::Index>(i)] += sigma * rng::normal(seed, ordinal, i);
            break;
        case NoiseKind::add_chi2:
            for (std::uint64_t i = 0; i < n; ++i) {
                const double eps = sigma * rng::normal(seed, ordinal, i);
                auto& ri = r[static_cast<Eigen::Index>(i)];
                ri = std::sqrt(ri * ri + eps * eps);
            }
            break;
    }
}

bool Problem::bounded() const {
    return (lower.array() > -kInf).any() || (upper.array() < kInf).any();
}

Vector evaluate(const Problem& problem, const Vector& x, const NoiseSpec& noise,
                EvalBudget& budget) {
    if (!x.allFinite()) throw EvalFailure(problem.name + ": non-finite point");
    if (budget.exhausted()) throw BudgetExhausted();
    const std::uint64_t ordinal = static_cast<std::uint64_t>(budget.used) + 1;
    budget.used += 1;
    Vector r = problem.residual(x);
    if (!r.allFinite()) throw EvalFailure(problem.name + ": non-finite residual");
    noise.apply(r, ordinal);
    if (!r.allFinite()) throw EvalFailure(problem.name + ": non-finite noisy residual");
    return r;
}

double objective(const Vector& rvec) { return 0.5 * rvec.squaredNorm(); }

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.emplace_back(e.name);
    out.emplace_back("integreq");
    return out;
}

Problem make_problem(const std::string& name, std::optional<int> dim) {
    if (name == "integreq") return make_integreq(dim.value_or(100));
    if (dim.has_value()) throw ConfigError(name + " has fixed dimension");
    for (const auto& e : registry()) {
        if (name == e.name) {
            Problem p = from_entry(e);
            check_reference(p);
            return p;
        }
    }
    throw ConfigError("unknown problem id: " + name);
}

std::vector<Problem> build_suite(const std::vector<std::string>& names) {
    std::vector<Problem> out;
    out.reserve(names.size());
    for (const auto& name : names) out.push_back(make_problem(name));
    return out;
}

std::vector<Problem> build_suite() { return build_suite(suite_names()); }

}  // namespace dflsq
