#include "dflsq/interp.hpp"

#include <cmath>
#include <limits>

#include "dflsq/subproblems.hpp"

namespace dflsq {

namespace {
constexpr double kPivotRel = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

InterpolationSet::InterpolationSet(Vector base, Matrix offsets, Matrix rvals)
    : base_(std::move(base)), offsets_(std::move(offsets)), rvals_(std::move(rvals)) {
    if (offsets_.rows() != offsets_.cols() + 1 || rvals_.rows() != offsets_.rows()) {
        throw std::logic_error("interpolation set needs n+1 points with residuals");
    }
    fvals_.resize(size());
    for (int t = 0; t < size(); ++t) fvals_[t] = 0.5 * rvals_.row(t).squaredNorm();
}

int InterpolationSet::best_index() const {
    int best = 0;
    for (int t = 1; t < size(); ++t) {
        if (fvals_[t] < fvals_[best]) best = t;
    }
    return best;
}

double InterpolationSet::distance_from_iterate(int t) const {
    return (offsets_.row(t) - offsets_.row(0)).norm();
}

void InterpolationSet::replace(int t, const Vector& point_abs, const Vector& rvec) {
    offsets_.row(t) = (point_abs - base_).transpose();
    rvals_.row(t) = rvec.transpose();
    fvals_[t] = 0.5 * rvec.squaredNorm();
    lu_.reset();
}

void InterpolationSet::set_iterate(int t) {
    if (t == 0) return;
    offsets_.row(0).swap(offsets_.row(t));
    rvals_.row(0).swap(rvals_.row(t));
    std::swap(fvals_[0], fvals_[t]);
    lu_.reset();
}

void InterpolationSet::shift_base(const Vector& new_base) {
    const Vector db = new_base - base_;
    offsets_.rowwise() -= db.transpose();
    base_ = new_base;
    // W holds differences between points only, so the factorization survives
}

Matrix InterpolationSet::w() const {
    const int n = dim();
    Matrix w(n, n);
    for (int t = 1; t <= n; ++t) w.row(t - 1) = offsets_.row(t) - offsets_.row(0);
    return w;
}

void InterpolationSet::ensure_factored() const {
    if (lu_.has_value()) return;
    const Matrix wm = w();
    w_norm_ = wm.cwiseAbs().rowwise().sum().maxCoeff();
    lu_.emplace(wm);
    min_pivot_ = lu_->matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!std::isfinite(min_pivot_)) min_pivot_ = 0.0;
}

bool InterpolationSet::poised() const {
    ensure_factored();
    return w_norm_ > 0.0 && min_pivot_ > kPivotRel * w_norm_;
}

double InterpolationSet::w_inf_norm() const {
    ensure_factored();
    return w_norm_;
}

double InterpolationSet::condition_estimate() const {
    if (!poised()) return kInf;
    const Matrix winv = lu_->inverse();
    return w_norm_ * winv.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix InterpolationSet::solve_w(const Matrix& rhs) const {
    if (!poised()) throw DegenerateGeometry("interpolation matrix is numerically singular");
    return lu_->solve(rhs);
}

Matrix solve_jacobian(const InterpolationSet& set) {
    const int n = set.dim();
    const int m = set.residual_dim();
    Matrix rhs(n, m);
    const Vector r0 = set.residual(0);
    for (int t = 1; t <= n; ++t) rhs.row(t - 1) = (set.residual(t) - r0).transpose();
    return set.solve_w(rhs).transpose();
}

LagrangeBasis lagrange_basis(const InterpolationSet& set) {
    const int n = set.dim();
    Matrix rhs(n, n + 1);
    rhs.col(0) = Vector::Constant(n, -1.0);
    rhs.rightCols(n) = Matrix::Identity(n, n);
    LagrangeBasis basis;
    basis.anchor = set.iterate();
    basis.grads = set.solve_w(rhs);
    return basis;
}

double poisedness(const InterpolationSet& set, const Vector& center, double radius,
                  const Vector& lower, const Vector& upper) {
    if (!set.poised()) return kInf;
    const LagrangeBasis basis = lagrange_basis(set);
    double lam = 0.0;
    for (int t = 0; t < basis.count(); ++t) {
        const Vector g = basis.gradient(t);
        if (g.norm() == 0.0) {
            lam = std::max(lam, std::abs(basis.value(t, center)));
            continue;
        }
        const Vector yp = lin_max_ball_box(g, radius, center, lower, upper);
        const Vector ym = lin_max_ball_box(-g, radius, center, lower, upper);
        lam = std::max({lam, std::abs(basis.value(t, yp)), std::abs(basis.value(t, ym))});
    }
    return lam;
}

int replacement_score(const InterpolationSet& set, const Vector& candidate, double delta) {
    const LagrangeBasis basis = lagrange_basis(set);
    const int protected_t = set.best_index();
    int pick = -1;
    double best_score = -1.0;
    for (int t = 0; t < set.size(); ++t) {
        if (t == protected_t) continue;
        const double sigma = basis.value(t, candidate);
        const double d = set.distance_from_iterate(t) / delta;
        const double score = std::abs(sigma) * std::max(d * d * d * d, 1.0);
        if (score > best_score) {
            best_score = score;
            pick = t;
        }
    }
    return pick;
}

double sigma_identity_check(const InterpolationSet& set, const Vector& candidate) {
    const int n = set.dim();
    const LagrangeBasis basis = lagrange_basis(set);

    // rank-1 update denominators: replacing row t of W maps W to W + e_t v^T
    // with v = candidate - y_t; replacing the iterate shifts every row by
    // x_k - candidate, i.e. W + e v^T with v = x_k - candidate.
    Matrix rhs(n, n + 1);
    rhs.col(0) = Vector::Constant(n, 1.0);
    rhs.rightCols(n) = Matrix::Identity(n, n);
    const Matrix z = set.solve_w(rhs);  // [W^-1 e | W^-1]

    double worst = 0.0;
    for (int t = 0; t < set.size(); ++t) {
        const Vector v = (t == 0) ? Vector(set.point(0) - candidate)
                                  : Vector(candidate - set.point(t));
        const double sigma = 1.0 + v.dot(z.col(t));
        worst = std::max(worst, std::abs(sigma - basis.value(t, candidate)));
    }
    return worst;
}

}  // namespace dflsq
