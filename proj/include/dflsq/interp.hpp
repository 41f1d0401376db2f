#pragma once

#include <Eigen/LU>
#include <optional>

#include "dflsq/types.hpp"

namespace dflsq {

/// The n+1 interpolation points of the affine residual model, stored as
/// offsets from a base point. Row 0 always holds the current iterate x_k.
/// The shifted system matrix W (rows y_t - x_k, t = 1..n) is factorized
/// lazily, once per geometry change, and the factorization is reused for
/// every solve against it.
class InterpolationSet {
public:
    InterpolationSet(Vector base, Matrix offsets, Matrix rvals);

    int dim() const { return static_cast<int>(offsets_.cols()); }
    int residual_dim() const { return static_cast<int>(rvals_.cols()); }
    int size() const { return static_cast<int>(offsets_.rows()); }  // n+1

    const Vector& base() const { return base_; }
    Vector offset(int t) const { return offsets_.row(t); }
    Vector point(int t) const { return base_ + offsets_.row(t).transpose(); }
    Vector iterate() const { return point(0); }
    Vector residual(int t) const { return rvals_.row(t); }
    double fvalue(int t) const { return fvals_[t]; }
    int best_index() const;
    double distance_from_iterate(int t) const;

    /// Replace point t with (point, residual). Invalidates the factorization.
    void replace(int t, const Vector& point_abs, const Vector& rvec);
    /// Swap point t into row 0, making it the current iterate.
    void set_iterate(int t);
    /// Re-centre the stored offsets on a new base point. W is unchanged.
    void shift_base(const Vector& new_base);

    /// True when W is invertible under the scale-aware pivot threshold
    /// (a pivot below 1e-14 * ||W||_inf declares the set degenerate).
    bool poised() const;
    double w_inf_norm() const;
    /// ||W||_inf * ||W^-1||_inf; +inf for a degenerate set.
    double condition_estimate() const;
    Matrix w() const;

    /// Solve W X = rhs using the cached factorization.
    /// Throws DegenerateGeometry when the set is not poised.
    Matrix solve_w(const Matrix& rhs) const;

private:
    void ensure_factored() const;

    Vector base_;
    Matrix offsets_;  // (n+1) x n, row t = y_t - base
    Matrix rvals_;    // (n+1) x m
    Vector fvals_;    // ||r_t||^2 / 2
    mutable std::optional<Eigen::PartialPivLU<Matrix>> lu_;
    mutable double min_pivot_ = 0.0;
    mutable double w_norm_ = 0.0;
};

/// Affine Lagrange basis of the set: L_t(y) = [t==0] + g_t . (y - x_k).
struct LagrangeBasis {
    Vector anchor;  // x_k
    Matrix grads;   // n x (n+1), column t = g_t

    int count() const { return static_cast<int>(grads.cols()); }
    Vector gradient(int t) const { return grads.col(t); }
    double value(int t, const Vector& y_abs) const {
        return (t == 0 ? 1.0 : 0.0) + grads.col(t).dot(y_abs - anchor);
    }
};

/// Model Jacobian J (m x n) from the interpolation conditions
/// J (y_t - x_k) = r(y_t) - r(x_k), t = 1..n. One factorization, m solves.
Matrix solve_jacobian(const InterpolationSet& set);

LagrangeBasis lagrange_basis(const InterpolationSet& set);

/// Lambda-poisedness of the set in B(center, radius) intersected with the
/// box [lower, upper]: max_t max_y |L_t(y)|. Each inner maximum is computed
/// exactly by two runs of the linear geometry subproblem (+g_t and -g_t).
/// Returns +inf for a degenerate set.
double poisedness(const InterpolationSet& set, const Vector& center, double radius,
                  const Vector& lower, const Vector& upper);

/// Index of the point to evict when inserting candidate: argmax over t of
/// |sigma_t| * max(||y_t - x_k||^4 / delta^4, 1) with sigma_t = L_t(candidate).
/// The point with the lowest recorded objective is never selected; ties break
/// to the lowest index.
int replacement_score(const InterpolationSet& set, const Vector& candidate, double delta);

/// Self-test of the stable-update identity: sigma_t recomputed as the
/// Sherman-Morrison denominator of the rank-1 row update must equal
/// L_t(candidate). Returns max_t |sigma_t - L_t(candidate)|.
double sigma_identity_check(const InterpolationSet& set, const Vector& candidate);

}  // namespace dflsq
