#include "dflsq/models.hpp"

#include <cassert>
#include <cmath>

namespace dflsq {

double ObjectiveModel::value(const Vector& s) const {
    return f0_ + g_.dot(s) + 0.5 * (J_ * s).squaredNorm();
}

double ObjectiveModel::value_residual_form(const Vector& s) const {
    return 0.5 * (rk_ + J_ * s).squaredNorm();
}

double ObjectiveModel::hess_norm() const {
    if (hess_norm_ >= 0.0) return hess_norm_;
    const int n = dim();
    double lam = 0.0;
    if (n > 0 && J_.size() > 0) {
        Vector v = Vector::LinSpaced(n, 1.0, 2.0).normalized();
        double prev = -1.0;
        for (int it = 0; it < 500; ++it) {
            lam = (J_ * v).squaredNorm();  // Rayleigh quotient of J^T J at unit v
            if (prev >= 0.0 && std::abs(lam - prev) <= 1e-13 * std::max(1.0, lam)) break;
            prev = lam;
            Vector u = J_.transpose() * (J_ * v);
            const double un = u.norm();
            if (un == 0.0) break;
            v = u / un;
        }
        const double gn = g_.norm();
        if (gn > 0.0) lam = std::max(lam, (J_ * (g_ / gn)).squaredNorm());
    }
    hess_norm_ = lam;
    return hess_norm_;
}

std::pair<ResidualModel, ObjectiveModel> build_objective_model(const InterpolationSet& set) {
    Matrix J = solve_jacobian(set);
    const Vector rk = set.residual(0);
    const Vector xk_off = set.offset(0);

    ResidualModel rm;
    rm.base = set.base();
    rm.c = rk - J * xk_off;
    rm.J = J;

    Vector g = J.transpose() * rk;
    ObjectiveModel om(0.5 * rk.squaredNorm(), std::move(g), std::move(J), rk);
    return {std::move(rm), std::move(om)};
}

double model_value(const ObjectiveModel& model, const Vector& s) {
    const double v = model.value(s);
#ifndef NDEBUG
    const double v2 = model.value_residual_form(s);
    assert(std::abs(v - v2) <= 1e-12 * (1.0 + std::abs(v) + std::abs(v2)));
#endif
    return v;
}

void shift_base(InterpolationSet& set, const Vector& new_base, ResidualModel& model) {
    const Vector db = new_base - model.base;
    model.c += model.J * db;
    model.base = new_base;
    set.shift_base(new_base);
}

}  // namespace dflsq
