#include "dflsq/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dflsq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// largest alpha >= 0 with ||d + alpha*s|| = delta, assuming ||d|| <= delta.
// Uses the q-form of the quadratic formula when the naive form would cancel.
double ball_crossing(const Vector& d, const Vector& s, double delta) {
    const double c2 = s.squaredNorm();
    if (c2 == 0.0) return 0.0;
    const double c1 = d.dot(s);
    const double c0 = d.squaredNorm() - delta * delta;  // <= 0
    const double disc = std::sqrt(std::max(c1 * c1 - c2 * c0, 0.0));
    double alpha = (c1 > 0.0) ? -c0 / (c1 + disc) : (disc - c1) / c2;
    return std::max(alpha, 0.0);
}

void snap_feasible(Vector& s, const Vector& ls, const Vector& us, double delta) {
    s = s.cwiseMax(ls).cwiseMin(us);
    const double sn = s.norm();
    if (sn > delta) s *= delta / sn;  // 0 is in the box, so scaling stays feasible
}

void check_feasible(const Vector& s, const Vector& ls, const Vector& us, double delta) {
    const double slack = 1e-10;
    if (s.norm() > delta * (1.0 + slack)) {
        throw std::logic_error("trust-region step left the ball");
    }
    for (int i = 0; i < s.size(); ++i) {
        const double tol = slack * std::max(1.0, std::abs(s[i]));
        if (s[i] < ls[i] - tol || s[i] > us[i] + tol) {
            throw std::logic_error("trust-region step left the box");
        }
    }
}

// first crossing of a box face along p from s; returns the face index in *hit
double box_crossing(const Vector& s, const Vector& p, const Vector& ls, const Vector& us,
                    const std::vector<char>& frozen, int* hit, bool* hit_upper) {
    double alpha = kInf;
    *hit = -1;
    for (int i = 0; i < s.size(); ++i) {
        if (frozen[i] || p[i] == 0.0) continue;
        if (p[i] > 0.0 && us[i] < kInf) {
            const double a = (us[i] - s[i]) / p[i];
            if (a < alpha) {
                alpha = a;
                *hit = i;
                *hit_upper = true;
            }
        } else if (p[i] < 0.0 && ls[i] > -kInf) {
            const double a = (ls[i] - s[i]) / p[i];
            if (a < alpha) {
                alpha = a;
                *hit = i;
                *hit_upper = false;
            }
        }
    }
    return std::max(alpha, 0.0);
}

// exact minimizer of a 2x2 quadratic over a ball: g.d + d.Hd/2, ||d|| <= delta
Eigen::Vector2d trs_2d(const Eigen::Matrix2d& H, const Eigen::Vector2d& g, double delta) {
    const double a = H(0, 0), b = 0.5 * (H(0, 1) + H(1, 0)), c = H(1, 1);
    const double mid = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    const double l1 = mid - rad, l2 = mid + rad;
    Eigen::Vector2d v1, v2;
    if (rad < 1e-300) {
        v1 << 1.0, 0.0;
        v2 << 0.0, 1.0;
    } else {
        const double theta = 0.5 * std::atan2(2.0 * b, a - c);
        v1 << -std::sin(theta), std::cos(theta);  // eigenvector of l1
        v2 << std::cos(theta), std::sin(theta);
        // atan2 ordering: v2 belongs to the larger of the two shifted values
        const double q2 = v2.dot(H * v2);
        if (std::abs(q2 - l2) > std::abs(q2 - l1)) std::swap(v1, v2);
    }
    const double g1 = g.dot(v1), g2 = g.dot(v2);

    auto compose = [&](double lam) {
        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        if (l1 + lam > 0.0) d -= (g1 / (l1 + lam)) * v1;
        if (l2 + lam > 0.0) d -= (g2 / (l2 + lam)) * v2;
        return d;
    };

    if (l1 > 0.0) {
        const Eigen::Vector2d d = compose(0.0);
        if (d.norm() <= delta) return d;
    } else if (std::abs(g1) <= 1e-14 * std::max(1.0, g.norm())) {
        // flat direction carries no gradient: pseudo-inverse step
        const Eigen::Vector2d d = compose(0.0);
        if (d.norm() <= delta) return d;
    }
    // boundary solution: bisect the monotone ||d(lam)|| - delta
    double lo = std::max(0.0, -l1), hi = std::max(lo, 0.0) + g.norm() / delta + std::abs(l2) + 1.0;
    for (int it = 0; it < 100; ++it) {
        const double lam = 0.5 * (lo + hi);
        if (compose(lam).norm() > delta) {
            lo = lam;
        } else {
            hi = lam;
        }
    }
    Eigen::Vector2d d = compose(hi);
    if (d.norm() > delta) d *= delta / d.norm();
    return d;
}

}  // namespace

Vector lin_max_ball_box(const Vector& g, double delta, const Vector& xk,
                        const Vector& lower, const Vector& upper) {
    const int n = static_cast<int>(g.size());
    Vector y = xk;
    Vector s = g;
    std::vector<char> active(n, 0);
    for (int i = 0; i < n; ++i) {
        if (upper[i] - lower[i] <= 0.0) {
            s[i] = 0.0;
            active[i] = 1;
        }
    }
    for (int j = 0; j < n; ++j) {
        if (s.norm() == 0.0) break;
        const double alpha = ball_crossing(y - xk, s, delta);
        Vector y_try = y + alpha * s;
        int viol = -1;
        for (int i = 0; i < n; ++i) {
            if (active[i]) continue;
            if (y_try[i] < lower[i] || y_try[i] > upper[i]) {
                viol = i;
                break;
            }
        }
        if (viol < 0) {
            y = y_try;
            break;
        }
        // step to the violated face, freeze that coordinate
        const double target = s[viol] > 0.0 ? upper[viol] : lower[viol];
        double beta = (target - y[viol]) / s[viol];
        beta = std::clamp(beta, 0.0, alpha);
        y += beta * s;
        y[viol] = target;
        s[viol] = 0.0;
        active[viol] = 1;
    }
    Vector step = y - xk;
    snap_feasible(step, Vector(lower - xk), Vector(upper - xk), delta);
    check_feasible(step, Vector(lower - xk), Vector(upper - xk), delta);
    return xk + step;
}

Vector geometry_point(const InterpolationSet& set, int t, const Vector& center, double delta,
                      const Vector& lower, const Vector& upper, double* lambda_value) {
    const LagrangeBasis basis = lagrange_basis(set);
    const Vector g = basis.gradient(t);
    if (g.norm() == 0.0) {
        if (lambda_value) *lambda_value = std::abs(basis.value(t, center));
        return center;
    }
    const Vector yp = lin_max_ball_box(g, delta, center, lower, upper);
    const Vector ym = lin_max_ball_box(-g, delta, center, lower, upper);
    const double vp = std::abs(basis.value(t, yp));
    const double vm = std::abs(basis.value(t, ym));
    if (lambda_value) *lambda_value = std::max(vp, vm);
    return vp >= vm ? yp : ym;
}

TrustRegionStep solve_trs(const ObjectiveModel& model, double delta, const Vector& xk,
                          const Vector& lower, const Vector& upper) {
    const int n = model.dim();
    const Vector& g = model.gradient();
    const double gnorm = g.norm();
    const Vector ls = lower - xk;
    const Vector us = upper - xk;

    TrustRegionStep out;
    out.s = Vector::Zero(n);
    if (gnorm == 0.0) return out;

    auto reduction = [&](const Vector& s) { return -(g.dot(s) + 0.5 * (model.jacobian() * s).squaredNorm()); };

    // projected Cauchy point: exact linesearch along -g, clipped at the first bound
    Vector best;
    double cauchy_red = 0.0;
    {
        const Vector d = -g;
        int hit;
        bool hit_upper;
        std::vector<char> none(n, 0);
        const double t_box = box_crossing(Vector::Zero(n), d, ls, us, none, &hit, &hit_upper);
        const double t_ball = delta / gnorm;
        const double ghg = (model.jacobian() * d).squaredNorm();
        const double t_unc = ghg > 0.0 ? gnorm * gnorm / ghg : kInf;
        out.cauchy_blocked = t_box < std::min(t_ball, t_unc);
        const double t_star = std::min({t_ball, t_box, t_unc});
        best = t_star * d;
        snap_feasible(best, ls, us, delta);
        cauchy_red = reduction(best);
    }
    double best_red = cauchy_red;

    // projected truncated CG with active-set restarts
    Vector s_cg = Vector::Zero(n);
    {
        std::vector<char> frozen(n, 0);
        for (int i = 0; i < n; ++i) {
            if (us[i] - ls[i] <= 0.0) frozen[i] = 1;
        }
        auto project = [&](Vector& v) {
            for (int i = 0; i < n; ++i)
                if (frozen[i]) v[i] = 0.0;
        };
        const double tol = 1e-8 * std::max(1.0, gnorm);
        const int cap = 10 * n;
        bool done = false;
        while (!done && out.cg_iterations < cap) {
            Vector r = -(g + model.hess_vec(s_cg));
            project(r);
            double rr = r.squaredNorm();
            if (std::sqrt(rr) <= tol) break;
            Vector p = r;
            bool restart = false;
            while (out.cg_iterations < cap) {
                Vector hp = model.hess_vec(p);
                project(hp);
                const double kappa = p.dot(hp);
                const double a_cg = kappa > 0.0 ? rr / kappa : kInf;
                const double a_ball = ball_crossing(s_cg, p, delta);
                int hit;
                bool hit_upper = false;
                const double a_box = box_crossing(s_cg, p, ls, us, frozen, &hit, &hit_upper);
                ++out.cg_iterations;
                if (a_ball <= a_cg && a_ball <= a_box) {
                    s_cg += a_ball * p;
                    const double sn = s_cg.norm();
                    if (sn > 0.0) s_cg *= delta / sn;
                    done = true;
                    break;
                }
                if (a_box < a_cg) {
                    s_cg += a_box * p;
                    if (hit >= 0) {
                        s_cg[hit] = hit_upper ? us[hit] : ls[hit];
                        frozen[hit] = 1;
                    }
                    restart = true;
                    break;
                }
                s_cg += a_cg * p;
                Vector rn = r - a_cg * hp;
                project(rn);
                const double rnrn = rn.squaredNorm();
                if (std::sqrt(rnrn) <= tol) {
                    done = true;
                    break;
                }
                p = rn + (rnrn / rr) * p;
                r = rn;
                rr = rnrn;
            }
            if (!restart && !done) break;  // iteration cap
        }
        snap_feasible(s_cg, ls, us, delta);
        const double red = reduction(s_cg);
        if (red > best_red) {
            best_red = red;
            best = s_cg;
        }
    }

    // 2-d polish over span{-g, s_cg}: exact ball solution, then box snap
    if (s_cg.norm() > 0.0) {
        const Vector b1 = g / gnorm;
        Vector b2 = s_cg - s_cg.dot(b1) * b1;
        const double b2n = b2.norm();
        if (b2n > 1e-12 * s_cg.norm()) {
            b2 /= b2n;
            Eigen::Matrix2d h2;
            const Vector hb1 = model.hess_vec(b1);
            const Vector hb2 = model.hess_vec(b2);
            h2 << b1.dot(hb1), b1.dot(hb2), b2.dot(hb1), b2.dot(hb2);
            const Eigen::Vector2d g2(gnorm, 0.0);  // g = gnorm * b1
            const Eigen::Vector2d d = trs_2d(h2, g2, delta);
            Vector s2 = d[0] * b1 + d[1] * b2;
            snap_feasible(s2, ls, us, delta);
            const double red = reduction(s2);
            if (red > best_red) {
                best_red = red;
                best = s2;
            }
        }
    }

    // feasible polish: projected model-gradient descent with backtracking,
    // accepted only on strict improvement
    {
        Vector s = best;
        double red = best_red;
        for (int it = 0; it < 30; ++it) {
            Vector d = -(g + model.hess_vec(s));
            for (int i = 0; i < n; ++i) {
                const double tol = 1e-12 * std::max(1.0, std::abs(s[i]));
                if ((s[i] >= us[i] - tol && d[i] > 0.0) || (s[i] <= ls[i] + tol && d[i] < 0.0)) {
                    d[i] = 0.0;
                }
            }
            const double dn = d.norm();
            if (dn <= 1e-14 * std::max(1.0, gnorm)) break;
            const double dhd = (model.jacobian() * d).squaredNorm();
            double t = dhd > 0.0 ? d.squaredNorm() / dhd : delta / dn;
            bool improved = false;
            for (int half = 0; half < 12 && !improved; ++half) {
                Vector s_try = s + t * d;
                snap_feasible(s_try, ls, us, delta);
                const double red_try = reduction(s_try);
                if (red_try > red * (1.0 + 1e-14) + 1e-300) {
                    s = std::move(s_try);
                    red = red_try;
                    improved = true;
                }
                t *= 0.5;
            }
            if (!improved) break;
        }
        if (red > best_red) {
            best_red = red;
            best = s;
        }
    }

    check_feasible(best, ls, us, delta);
    out.s = best;
    out.step_norm = best.norm();
    out.predicted_reduction = best_red;
    for (int i = 0; i < n; ++i) {
        const double tol = 1e-12 * std::max(1.0, std::abs(best[i]));
        if ((ls[i] > -kInf && best[i] <= ls[i] + tol) || (us[i] < kInf && best[i] >= us[i] - tol)) {
            out.bound_active = true;
        }
    }
    // certificate: the classical sufficient-decrease bound when the descent
    // ray was not clipped by a bound, the projected-Cauchy value otherwise
    const double hn = std::max(model.hess_norm(), 1.0);
    const double certificate = out.cauchy_blocked
                                   ? cauchy_red
                                   : 0.5 * gnorm * std::min(delta, gnorm / hn);
    out.cauchy_ok = out.predicted_reduction >= certificate * (1.0 - 1e-10);
    return out;
}

}  // namespace dflsq
