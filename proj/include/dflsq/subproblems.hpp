#pragma once

#include "dflsq/interp.hpp"
#include "dflsq/models.hpp"
#include "dflsq/types.hpp"

namespace dflsq {

struct TrustRegionStep {
    Vector s;
    double predicted_reduction = 0.0;
    double step_norm = 0.0;
    bool cauchy_ok = true;       // sufficient-decrease certificate held
    bool cauchy_blocked = false; // a bound clipped the steepest-descent ray
    bool bound_active = false;
    int cg_iterations = 0;
};

/// Approximately minimize the quadratic model over the intersection of the
/// ball ||s|| <= delta and the box [lower, upper] around xk. Projected
/// truncated CG with active-set restarts; a projected Cauchy point and a 2-d
/// subspace polish guarantee and certify the sufficient-decrease condition
/// pred >= 0.5 ||g|| min(delta, ||g||/max(||H||,1)).
TrustRegionStep solve_trs(const ObjectiveModel& model, double delta, const Vector& xk,
                          const Vector& lower, const Vector& upper);

/// Maximize g.y over ||y - xk|| <= delta, lower <= y <= upper by an
/// active-set ray sweep: step to the ball along the free directions, clip the
/// first violated bound, zero that component, repeat (at most n passes).
/// Returns xk when g = 0.
Vector lin_max_ball_box(const Vector& g, double delta, const Vector& xk,
                        const Vector& lower, const Vector& upper);

/// Maximize |L_t| over B(center, delta) intersected with the box by running
/// lin_max_ball_box along +g_t and -g_t and keeping the larger |L_t|; ties
/// break toward the +g_t ray. Writes the attained |L_t| into lambda_value
/// when provided.
Vector geometry_point(const InterpolationSet& set, int t, const Vector& center,
                      double delta, const Vector& lower, const Vector& upper,
                      double* lambda_value = nullptr);

}  // namespace dflsq
