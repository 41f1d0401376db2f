#pragma once

#include "dflsq/interp.hpp"
#include "dflsq/types.hpp"

namespace dflsq {

/// Affine residual model r(y) ~ c + J (y - base), anchored at a base point
/// so that the prediction at the iterate reproduces r(x_k) exactly.
struct ResidualModel {
    Vector base;
    Vector c;
    Matrix J;

    Vector predict(const Vector& y_abs) const { return c + J * (y_abs - base); }
};

/// Gauss-Newton quadratic model of the objective, m(s) = f0 + g.s + s.Hs/2
/// with H = J^T J held implicitly; H v is always formed as J^T (J v).
class ObjectiveModel {
public:
    ObjectiveModel(double f0, Vector g, Matrix J, Vector rk)
        : f0_(f0), g_(std::move(g)), J_(std::move(J)), rk_(std::move(rk)) {}

    double f0() const { return f0_; }
    const Vector& gradient() const { return g_; }
    const Matrix& jacobian() const { return J_; }
    const Vector& residual_at_iterate() const { return rk_; }
    int dim() const { return static_cast<int>(J_.cols()); }

    Vector hess_vec(const Vector& v) const { return J_.transpose() * (J_ * v); }
    double value(const Vector& s) const;
    /// Same quadratic evaluated through ||r_k + J s||^2 / 2.
    double value_residual_form(const Vector& s) const;
    /// ||H|| = ||J||^2; power iteration on J^T J, cached.
    double hess_norm() const;

private:
    double f0_;
    Vector g_;
    Matrix J_;
    Vector rk_;
    mutable double hess_norm_ = -1.0;
};

std::pair<ResidualModel, ObjectiveModel> build_objective_model(const InterpolationSet& set);

double model_value(const ObjectiveModel& model, const Vector& s);

/// Re-centre both the set and the residual model on a new base point.
/// Predictions are unchanged: c <- c + J (new_base - base).
void shift_base(InterpolationSet& set, const Vector& new_base, ResidualModel& model);

}  // namespace dflsq
