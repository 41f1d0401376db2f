#include "dflsq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dflsq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// step-norm lower-bound factor 2*c1/(1+sqrt(1+2*c1)) at c1 = 1/2
const double kStepFactor = 1.0 / (1.0 + std::sqrt(2.0));

struct TerminateSignal {
    Termination status;
};
}  // namespace

Mode mode_from_string(const std::string& s) {
    if (s == "faithful") return Mode::faithful;
    if (s == "practical") return Mode::practical;
    throw ConfigError("unknown mode: " + s);
}

std::string to_string(Mode m) { return m == Mode::faithful ? "faithful" : "practical"; }

std::string to_string(Termination t) {
    switch (t) {
        case Termination::small_objective: return "small_objective";
        case Termination::small_rho: return "small_rho";
        case Termination::budget: return "budget";
        case Termination::eval_failure: return "eval_failure";
    }
    return "budget";
}

void SolverConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (!(gamma_dec > 0 && gamma_dec < 1)) fail("gamma_dec must be in (0,1)");
    if (!(gamma_inc > 1 && gamma_inc <= gamma_inc_hat)) fail("need 1 < gamma_inc <= gamma_inc_hat");
    if (!(alpha1 > 0 && alpha1 < alpha2 && alpha2 < 1)) fail("need 0 < alpha1 < alpha2 < 1");
    if (!(eta1 > 0 && eta1 <= eta2 && eta2 < 1)) fail("need 0 < eta1 <= eta2 < 1");
    if (!(omega_s > 0 && omega_s < 1)) fail("omega_s must be in (0,1)");
    if (!(gamma_s > 0 && gamma_s < 0.5 * (std::sqrt(5.0) - 1.0))) fail("gamma_s out of range");
    if (!(eps_c > 0)) fail("eps_c must be positive");
    if (!(mu > 0)) fail("mu must be positive");
    if (!(omega_c > 0 && omega_c < 1)) fail("omega_c must be in (0,1)");
    if (!(lambda_poise >= 1)) fail("lambda_poise must be >= 1");
    if (!(geom_dist_factor >= 1)) fail("geom_dist_factor must be >= 1");
    if (!(rho_end > 0)) fail("rho_end must be positive");
    if (!(delta_max > 0)) fail("delta_max must be positive");
    if (delta0 > 0 && delta0 > delta_max) fail("delta0 exceeds delta_max");
}

double update_radius(double ratio, double delta, double step_norm, double rho,
                     const SolverConfig& config) {
    if (ratio >= config.eta2) {
        return std::min(std::max(config.gamma_inc * delta, config.gamma_inc_hat * step_norm),
                        config.delta_max);
    }
    if (ratio >= config.eta1) {
        return std::max({config.gamma_dec * delta, step_norm, rho});
    }
    return std::max(std::min(config.gamma_dec * delta, step_norm), rho);
}

double reduce_rho(double rho, double rho_end, double alpha1) {
    if (rho > 250.0 * rho_end) return alpha1 * rho;
    if (rho > 16.0 * rho_end) return std::sqrt(rho * rho_end);
    return rho_end;
}

struct Solver::Impl {
    Problem problem;
    SolverConfig cfg;
    NoiseSpec noise;

    EvalBudget budget;
    std::vector<EvalRecord> trace;
    std::vector<GeometrySnapshot> geometry;
    SolveStats stats;

    std::optional<InterpolationSet> set;
    double delta = 0.0;
    double rho = 0.0;
    long k = 0;
    int streak = 0;  // consecutive non-improving iterations (practical mode)
    double f0_observed = kInf;
    double best_f = kInf;
    Vector best_x;
    double last_gnorm = 0.0;
    bool initialized = false;
    std::optional<Termination> done;

    Impl(Problem p, SolverConfig c, NoiseSpec ns)
        : problem(std::move(p)), cfg(std::move(c)), noise(ns) {
        cfg.validate();
        if (cfg.max_evals <= 0) cfg.max_evals = 200 * (problem.n + 1);
        budget.max_evals = cfg.max_evals;
        best_x = problem.x0;
    }

    int n() const { return problem.n; }

    // ---- evaluation ---------------------------------------------------------

    std::pair<Vector, double> eval_point(const Vector& x) {
        Vector r = evaluate(problem, x, noise, budget);
        const double f = objective(r);
        EvalRecord rec;
        rec.eval_index = budget.used;
        rec.x = x;
        rec.f_noisy = f;
        rec.f_true = noise.deterministic() ? f : objective(problem.residual(x));
        trace.push_back(std::move(rec));
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        if (f0_observed == kInf) f0_observed = f;
        if (f <= std::max(1e-12, 1e-20 * f0_observed)) {
            throw TerminateSignal{Termination::small_objective};
        }
        return {std::move(r), f};
    }

    // ---- geometry maintenance -----------------------------------------------

    Vector simplex_offset(const Vector& x, int i, double radius) const {
        Vector y = x;
        double off = radius;
        if (x[i] + radius > problem.upper[i]) off = -radius;
        if (x[i] + off < problem.lower[i]) {
            // both sides clipped; take the longer feasible side
            const double up = problem.upper[i] - x[i];
            const double dn = x[i] - problem.lower[i];
            off = up >= dn ? std::min(radius, up) : -std::min(radius, dn);
        }
        y[i] += off;
        return y;
    }

    void rebuild_simplex(double radius) {
        ++stats.simplex_rebuilds;
        const Vector xk = set->iterate();
        for (int i = 0; i < n(); ++i) {
            const Vector y = simplex_offset(xk, i, radius);
            auto [r, f] = eval_point(y);
            set->replace(i + 1, y, r);
        }
    }

    double worst_distance(int* index) const {
        double dmax = 0.0;
        *index = -1;
        for (int t = 1; t < set->size(); ++t) {
            const double d = set->distance_from_iterate(t);
            if (d > dmax) {
                dmax = d;
                *index = t;
            }
        }
        return dmax;
    }

    // practical mode: move the furthest point when it strays beyond
    // geom_dist_factor * radius; one replacement per call
    bool repair_distance(double radius) {
        int t;
        const double dmax = worst_distance(&t);
        if (t < 0 || dmax <= cfg.geom_dist_factor * radius) return false;
        if (!set->poised()) {
            rebuild_simplex(radius);
            return true;
        }
        const Vector xk = set->iterate();
        const Vector y = geometry_point(*set, t, xk, radius, problem.lower, problem.upper);
        auto [r, f] = eval_point(y);
        set->replace(t, y, r);
        set->set_iterate(set->best_index());
        ++stats.geometry_steps;
        return true;
    }

    bool is_lambda_poised(double radius) const {
        if (!set->poised()) return false;
        for (int t = 1; t < set->size(); ++t) {
            if (set->distance_from_iterate(t) > radius * (1.0 + 1e-10)) return false;
        }
        return poisedness(*set, set->iterate(), radius, problem.lower, problem.upper) <=
               cfg.lambda_poise;
    }

    // faithful mode: replace points until the set is lambda-poised in
    // B(x_k, radius); far points are pulled in first. Returns false on cap.
    bool repair_poised(double radius) {
        const int cap = cfg.repair_cap_factor * (n() + 1);
        int count = 0;
        const Vector xk = set->iterate();
        while (count < cap) {
            if (!set->poised()) {
                rebuild_simplex(radius);
                count += n();
                continue;
            }
            int t = -1;
            double dmax = radius * (1.0 + 1e-10);
            for (int tt = 1; tt < set->size(); ++tt) {
                const double d = set->distance_from_iterate(tt);
                if (d > dmax) {
                    dmax = d;
                    t = tt;
                }
            }
            if (t < 0) {
                const LagrangeBasis basis = lagrange_basis(*set);
                double lam_all = 0.0, lam_best = -1.0;
                for (int tt = 0; tt < set->size(); ++tt) {
                    double lv = std::abs(basis.value(tt, xk));
                    const Vector g = basis.gradient(tt);
                    if (g.norm() > 0.0) {
                        const Vector yp =
                            lin_max_ball_box(g, radius, xk, problem.lower, problem.upper);
                        const Vector ym =
                            lin_max_ball_box(-g, radius, xk, problem.lower, problem.upper);
                        lv = std::max(std::abs(basis.value(tt, yp)), std::abs(basis.value(tt, ym)));
                    }
                    lam_all = std::max(lam_all, lv);
                    if (tt >= 1 && lv > lam_best) {
                        lam_best = lv;
                        t = tt;
                    }
                }
                if (lam_all <= cfg.lambda_poise) return true;
            }
            const Vector y = geometry_point(*set, t, xk, radius, problem.lower, problem.upper);
            auto [r, f] = eval_point(y);
            set->replace(t, y, r);
            ++stats.geometry_steps;
            ++count;
        }
        return false;
    }

    void repair_geometry(double radius) {
        if (cfg.mode == Mode::faithful) {
            repair_poised(radius);
        } else {
            repair_distance(radius);
        }
    }

    // ---- bookkeeping --------------------------------------------------------

    std::size_t model_bytes() const {
        const std::size_t nn = static_cast<std::size_t>(n());
        const std::size_t mm = static_cast<std::size_t>(problem.m);
        // set offsets + residuals + fvals + LU of W, both model copies of J,
        // model constant/gradient/residual vectors
        const std::size_t doubles = (nn + 1) * nn + (nn + 1) * mm + (nn + 1) + nn * nn +
                                    2 * mm * nn + mm + mm + nn + nn;
        return doubles * sizeof(double);
    }

    void record_geometry_snapshot() {
        if (!cfg.dump_geometry) return;
        GeometrySnapshot snap;
        snap.iteration = k;
        snap.delta = delta;
        snap.w_condition = set->condition_estimate();
        snap.points.resize(n(), set->size());
        for (int t = 0; t < set->size(); ++t) snap.points.col(t) = set->point(t);
        snap.lambda_values.resize(set->size());
        if (set->poised()) {
            const LagrangeBasis basis = lagrange_basis(*set);
            const Vector xk = set->iterate();
            for (int t = 0; t < set->size(); ++t) {
                double lv;
                geometry_point(*set, t, xk, delta, problem.lower, problem.upper, &lv);
                snap.lambda_values[t] = lv;
            }
        } else {
            snap.lambda_values.setConstant(kInf);
        }
        geometry.push_back(std::move(snap));
    }

    std::pair<ResidualModel, ObjectiveModel> build_models() {
        for (int attempt = 0; attempt < 2; ++attempt) {
            try {
                auto pair = build_objective_model(*set);
                stats.peak_model_bytes = std::max(stats.peak_model_bytes, model_bytes());
                last_gnorm = pair.second.gradient().norm();
                return pair;
            } catch (const DegenerateGeometry&) {
                rebuild_simplex(delta);
            }
        }
        return build_objective_model(*set);
    }

    // rho/delta pair reduction; terminates with small_rho at the floor
    void reduce_rho_pair(bool from_safety) {
        if (rho <= cfg.rho_end) throw TerminateSignal{Termination::small_rho};
        const double rho_old = rho;
        if (cfg.mode == Mode::practical) {
            rho = reduce_rho(rho_old, cfg.rho_end, cfg.alpha1);
        } else {
            const double next = cfg.alpha1 * rho_old;
            if (next < cfg.rho_end) throw TerminateSignal{Termination::small_rho};
            rho = next;
        }
        delta = cfg.alpha2 * rho_old;
        if (from_safety) {
            ++stats.safety_rho_reductions;
        } else {
            ++stats.unsuccessful_rho_reductions;
        }
    }

    // ---- phases --------------------------------------------------------------

    void criticality_phase(ResidualModel& rm, ObjectiveModel& om) {
        ++stats.criticality_phases;
        const double dinit = delta;
        bool settled = false;
        long passes = 0;
        for (int i = 1; i <= cfg.criticality_cap; ++i) {
            passes = i;
            const double radius = dinit * std::pow(cfg.omega_c, i - 1);
            repair_poised(radius);
            auto pair = build_models();
            rm = std::move(pair.first);
            om = std::move(pair.second);
            if (radius <= cfg.mu * om.gradient().norm()) {
                delta = radius;
                settled = true;
                break;
            }
        }
        if (!settled) {
            delta = dinit * std::pow(cfg.omega_c, cfg.criticality_cap - 1);
            stats.criticality_capped = true;
        }
        stats.last_criticality_passes = passes;
        stats.last_criticality_delta = delta;
        rho = std::min(rho, delta);
    }

    void safety_phase() {
        ++stats.safety_phases;
        const double d1 = std::max(rho, cfg.omega_s * delta);
        if (cfg.mode == Mode::faithful) {
            delta = d1;
            repair_poised(d1);
        } else {
            delta = d1;
            repair_distance(d1);  // skipped when every point passes the distance test
        }
        if (d1 == rho) {
            reduce_rho_pair(true);
        }
    }

    // ---- main iteration -------------------------------------------------------

    void initialize() {
        if (initialized) return;
        initialized = true;
        if (cfg.delta0 <= 0.0) {
            delta = 0.1 * std::max(problem.x0.lpNorm<Eigen::Infinity>(), 1.0);
        } else {
            delta = cfg.delta0;
        }
        rho = delta;
        try {
            Matrix offsets = Matrix::Zero(n() + 1, n());
            Matrix rvals(n() + 1, problem.m);
            auto [r0, f0] = eval_point(problem.x0);
            rvals.row(0) = r0.transpose();
            for (int i = 0; i < n(); ++i) {
                const Vector y = simplex_offset(problem.x0, i, delta);
                offsets.row(i + 1) = (y - problem.x0).transpose();
                auto [r, f] = eval_point(y);
                rvals.row(i + 1) = r.transpose();
            }
            set.emplace(problem.x0, std::move(offsets), std::move(rvals));
            if (cfg.mode == Mode::practical) set->set_iterate(set->best_index());
        } catch (const TerminateSignal& sig) {
            done = sig.status;
        } catch (const BudgetExhausted&) {
            done = Termination::budget;
        } catch (const EvalFailure&) {
            done = Termination::eval_failure;
        }
    }

    bool step() {
        if (!initialized) initialize();
        if (done) return false;
        try {
            run_iteration();
        } catch (const TerminateSignal& sig) {
            done = sig.status;
        } catch (const BudgetExhausted&) {
            done = Termination::budget;
        } catch (const EvalFailure&) {
            done = Termination::eval_failure;
        }
        return !done;
    }

    void run_iteration() {
        ++k;
        stats.iterations = k;

        if (!set->poised()) repair_geometry(delta);
        auto [rmodel, omodel] = build_models();

        // keep stored offsets small relative to the trust region
        if (set->offset(0).norm() > cfg.base_shift_factor * delta) {
            shift_base(*set, set->iterate(), rmodel);
            ++stats.base_shifts;
        }
        record_geometry_snapshot();

        if (cfg.mode == Mode::faithful && omodel.gradient().norm() <= cfg.eps_c) {
            criticality_phase(rmodel, omodel);
        }

        const Vector xk = set->iterate();
        TrustRegionStep trs =
            solve_trs(omodel, delta, xk, problem.lower, problem.upper);
        ++stats.trs_calls;
        if (omodel.gradient().norm() > 0.0) {
            if (!trs.cauchy_ok) ++stats.cauchy_violations;
            if (!trs.bound_active && !trs.cauchy_blocked && trs.cauchy_ok) {
                ++stats.step_bound_checks;
                const double lower_bound =
                    kStepFactor *
                    std::min(delta, omodel.gradient().norm() / std::max(omodel.hess_norm(), 1.0));
                if (trs.step_norm < lower_bound * (1.0 - 1e-10)) ++stats.step_bound_violations;
            }
        }

        if (trs.step_norm < cfg.gamma_s * rho) {
            safety_phase();
            return;
        }

        const Vector x_new = xk + trs.s;
        const double f_old = set->fvalue(0);
        auto [r_new, f_new] = eval_point(x_new);
        const double ratio = trs.predicted_reduction > 0.0
                                 ? (f_old - f_new) / trs.predicted_reduction
                                 : -kInf;
        const double delta_next = update_radius(ratio, delta, trs.step_norm, rho, cfg);

        if (cfg.mode == Mode::faithful) {
            if (ratio >= cfg.eta1) {
                const int t = replacement_score(*set, x_new, delta);
                set->replace(t, x_new, r_new);
                set->set_iterate(t);
                delta = delta_next;
            } else {
                const bool poised_ok = is_lambda_poised(delta_next);
                delta = delta_next;
                if (!poised_ok) {
                    repair_poised(delta);
                } else if (delta == rho) {
                    reduce_rho_pair(false);
                }
            }
            return;
        }

        // practical mode: always absorb the new point, then anchor on the best
        const int t = replacement_score(*set, x_new, delta);
        set->replace(t, x_new, r_new);
        set->set_iterate(set->best_index());

        if (ratio > 0.0) {
            streak = 0;
            delta = delta_next;
            return;
        }
        ++streak;
        delta = delta_next;
        if (repair_distance(delta)) return;
        if (delta == rho && ratio < 0.0 && streak >= 3) {
            reduce_rho_pair(false);
            streak = 0;
        }
    }

    SolveResult make_result() const {
        SolveResult out;
        out.x_final = best_x;
        out.f_final = best_f == kInf ? objective(problem.residual(problem.x0)) : best_f;
        out.evals_used = budget.used;
        out.iterations = k;
        out.termination = done.value_or(Termination::budget);
        out.trace = trace;
        out.stats = stats;
        out.geometry = geometry;
        return out;
    }
};

Solver::Solver(Problem problem, SolverConfig config, NoiseSpec noise)
    : impl_(std::make_unique<Impl>(std::move(problem), std::move(config), noise)) {}
Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

SolveResult Solver::run() {
    impl_->initialize();
    while (impl_->step()) {
    }
    return impl_->make_result();
}

void Solver::initialize() { impl_->initialize(); }
bool Solver::step() { return impl_->step(); }
bool Solver::terminated() const { return impl_->done.has_value(); }
double Solver::delta() const { return impl_->delta; }
double Solver::rho() const { return impl_->rho; }
int Solver::evals_used() const { return impl_->budget.used; }
long Solver::iteration() const { return impl_->k; }
int Solver::unsuccessful_streak() const { return impl_->streak; }
double Solver::model_gradient_norm() const { return impl_->last_gnorm; }
double Solver::best_objective() const { return impl_->best_f; }
const InterpolationSet& Solver::set() const { return *impl_->set; }
const SolveStats& Solver::stats() const { return impl_->stats; }
SolveResult Solver::result() const { return impl_->make_result(); }

SolveResult solve(const Problem& problem, const SolverConfig& config, const NoiseSpec& noise) {
    Solver solver(problem, config, noise);
    return solver.run();
}

}  // namespace dflsq
