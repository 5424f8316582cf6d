#pragma once

// Dense linear-algebra kernel: point sets, exact thin SVD (one-sided Jacobi),
// low-rank approximation and squared distances to query shapes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tinycore/error.hpp"

namespace tinycore {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kOrthTol = 1e-8;
inline constexpr double kReconTol = 1e-8;

// ceil() that forgives floating-point noise just above an integer, so that
// e.g. 3 / 0.1 = 30.000000000000004 rounds to 30.
inline long long ceil_tolerant(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(x));
}

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

// n x d matrix of points (rows) with optional non-negative weights.
class PointSet {
public:
    explicit PointSet(Matrix rows) : rows_(std::move(rows)) { validate(); }

    PointSet(Matrix rows, Vector weights) : rows_(std::move(rows)), weights_(std::move(weights)) {
        validate();
    }

    const Matrix& rows() const { return rows_; }
    const std::optional<Vector>& weights() const { return weights_; }
    bool weighted() const { return weights_.has_value(); }

    Index size() const { return rows_.rows(); }
    Index dim() const { return rows_.cols(); }

    double weight(Index i) const { return weights_ ? (*weights_)(i) : 1.0; }

    Vector weight_vector() const { return weights_ ? *weights_ : Vector::Ones(size()); }

    double total_weight() const {
        return weights_ ? weights_->sum() : static_cast<double>(size());
    }

    // Weighted mean row.
    Vector mean() const {
        const double w = total_weight();
        if (w <= 0.0) throw InvalidInput("mean of a point set with zero total weight");
        if (!weights_) return rows_.colwise().mean().transpose();
        return (rows_.transpose() * *weights_) / w;
    }

    PointSet subset(const std::vector<Index>& idx) const {
        Matrix r(static_cast<Index>(idx.size()), dim());
        Vector w(static_cast<Index>(idx.size()));
        for (Index i = 0; i < r.rows(); ++i) {
            r.row(i) = rows_.row(idx[static_cast<std::size_t>(i)]);
            w(i) = weight(idx[static_cast<std::size_t>(i)]);
        }
        if (!weights_) return PointSet(std::move(r));
        return PointSet(std::move(r), std::move(w));
    }

private:
    void validate() const {
        detail::require_input(rows_.rows() >= 1, "point set must contain at least one point");
        detail::require_input(rows_.cols() >= 1, "points must have dimension >= 1");
        detail::require_input(all_finite(rows_), "point coordinates must be finite");
        if (weights_) {
            detail::require_input(weights_->size() == rows_.rows(), "weight count must equal point count");
            detail::require_input(weights_->allFinite(), "weights must be finite");
            detail::require_input((weights_->array() >= 0.0).all(), "weights must be non-negative");
        }
    }

    Matrix rows_;
    std::optional<Vector> weights_;
};

// Thin SVD A = U diag(sigma) V^T with sigma sorted non-increasing.
struct SvdFactors {
    Matrix u;
    Vector sigma;
    Matrix v;

    Index rank_bound() const { return sigma.size(); }

    // Sum of sigma_i^2 for i > m (1-based), i.e. ||A - A^(m)||_F^2.
    double tail_energy(Index m) const {
        double s = 0.0;
        for (Index i = sigma.size() - 1; i >= m; --i) s += sigma(i) * sigma(i);
        return s;
    }
};

namespace detail {

// Orthonormal completion of the columns of q flagged as missing.
inline void complete_columns(Matrix& q, const std::vector<bool>& valid) {
    const Index n = q.rows();
    Index probe = 0;
    for (Index c = 0; c < q.cols(); ++c) {
        if (valid[static_cast<std::size_t>(c)]) continue;
        for (;; ++probe) {
            if (probe >= n) throw Error("failed to complete orthonormal basis");
            Vector e = Vector::Unit(n, probe);
            for (int pass = 0; pass < 2; ++pass) {
                // Columns still missing are zero and drop out of the projection.
                for (Index o = 0; o < q.cols(); ++o)
                    if (o != c) e -= q.col(o).dot(e) * q.col(o);
            }
            const double nrm = e.norm();
            if (nrm > 1e-6) {
                q.col(c) = e / nrm;
                ++probe;
                break;
            }
        }
    }
}

// One-sided (Hestenes) Jacobi on a tall matrix: rotates columns of `work`
// until mutually orthogonal, accumulating the rotations in `v`.
inline void hestenes_jacobi(Matrix& work, Matrix& v) {
    const Index d = work.cols();
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (Index p = 0; p + 1 < d; ++p) {
            for (Index q = p + 1; q < d; ++q) {
                const double alpha = work.col(p).squaredNorm();
                const double beta = work.col(q).squaredNorm();
                const double gamma = work.col(p).dot(work.col(q));
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Index r = 0; r < work.rows(); ++r) {
                    const double wp = work(r, p), wq = work(r, q);
                    work(r, p) = c * wp - s * wq;
                    work(r, q) = s * wp + c * wq;
                }
                for (Index r = 0; r < v.rows(); ++r) {
                    const double vp = v(r, p), vq = v(r, q);
                    v(r, p) = c * vp - s * vq;
                    v(r, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) return;
    }
}

inline SvdFactors svd_tall(const Matrix& a) {
    const Index n = a.rows();
    const Index d = a.cols();
    // Pre-reduce to the d x d triangular factor; Jacobi then works on short columns.
    Matrix q_factor;
    Matrix work;
    if (n > d) {
        Eigen::HouseholderQR<Matrix> qr(a);
        work = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
        q_factor = qr.householderQ() * Matrix::Identity(n, d);
    } else {
        work = a;
    }
    Matrix v = Matrix::Identity(d, d);
    hestenes_jacobi(work, v);

    Vector norms(d);
    for (Index i = 0; i < d; ++i) norms(i) = work.col(i).norm();
    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return norms(x) > norms(y); });

    SvdFactors f;
    f.sigma.resize(d);
    f.v.resize(d, d);
    Matrix u_small(work.rows(), d);
    std::vector<bool> valid(static_cast<std::size_t>(d), true);
    const double smax = d > 0 ? norms(order[0]) : 0.0;
    const double floor = smax * std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(n, d));
    for (Index i = 0; i < d; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        f.sigma(i) = norms(src);
        f.v.col(i) = v.col(src);
        if (norms(src) > floor && norms(src) > 0.0) {
            u_small.col(i) = work.col(src) / norms(src);
        } else {
            u_small.col(i).setZero();
            valid[static_cast<std::size_t>(i)] = false;
        }
    }
    complete_columns(u_small, valid);
    f.u = n > d ? Matrix(q_factor * u_small) : u_small;
    return f;
}

}  // namespace detail

// Exact thin SVD; r = min(n, d) singular triplets.
inline SvdFactors svd(const Matrix& a) {
    detail::require_input(a.rows() >= 1 && a.cols() >= 1, "svd of an empty matrix");
    detail::require_input(all_finite(a), "svd input must be finite");
    if (a.rows() >= a.cols()) return detail::svd_tall(a);
    SvdFactors t = detail::svd_tall(a.transpose());
    std::swap(t.u, t.v);
    return t;
}

// Row i scaled by sqrt(w_i); turns weighted subspace costs into plain Frobenius norms.
inline Matrix weighted_fold(const Matrix& rows, const Vector& weights) {
    detail::require_input(weights.size() == rows.rows(), "weight count must equal point count");
    detail::require_input((weights.array() >= 0.0).all(), "weights must be non-negative");
    return weights.array().sqrt().matrix().asDiagonal() * rows;
}

inline Matrix weighted_fold(const PointSet& points) {
    if (!points.weighted()) return points.rows();
    return weighted_fold(points.rows(), *points.weights());
}

// SVD of the (weight-folded) point matrix.
inline SvdFactors svd(const PointSet& points) { return svd(weighted_fold(points)); }

// A^(m) = U Sigma^(m) V^T.
inline Matrix low_rank_approx(const SvdFactors& f, Index m) {
    if (m < 1 || m > f.sigma.size()) throw InvalidArgument("low_rank_approx: m must lie in [1, min(n, d)]");
    return f.u.leftCols(m) * f.sigma.head(m).asDiagonal() * f.v.leftCols(m).transpose();
}

// Column-orthonormal basis for the column space of a (full column rank assumed).
inline Matrix orthonormalize(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
    // Fix signs so that the factor R has a non-negative diagonal (deterministic output).
    const Matrix r = qr.matrixQR();
    for (Index c = 0; c < a.cols(); ++c)
        if (r(c, c) < 0.0) q.col(c) *= -1.0;
    return q;
}

// d x (d - j) orthonormal complement of the column space of x.
inline Matrix orthogonal_complement(const Matrix& x) {
    Eigen::HouseholderQR<Matrix> qr(x);
    Matrix full = qr.householderQ();
    return full.rightCols(x.rows() - x.cols());
}

inline double max_orthogonality_error(const Matrix& q) {
    return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

// k point-centers (rows).
struct CenterSet {
    Matrix centers;

    CenterSet() = default;
    explicit CenterSet(Matrix c) : centers(std::move(c)) {
        detail::require_input(centers.rows() >= 1, "center set must be non-empty");
        detail::require_input(all_finite(centers), "centers must be finite");
    }

    Index size() const { return centers.rows(); }
    Index dim() const { return centers.cols(); }
};

// Affine j-subspace p + span(X), X column-orthonormal; no offset means linear.
struct Subspace {
    Matrix basis;
    std::optional<Vector> offset;

    Subspace() = default;
    explicit Subspace(Matrix x, std::optional<Vector> p = std::nullopt) : basis(std::move(x)), offset(std::move(p)) {
        detail::require(basis.cols() >= 1 && basis.cols() <= basis.rows() - 1,
                        "subspace dimension must lie in [1, d - 1]");
        detail::require(max_orthogonality_error(basis) <= kOrthTol, "subspace basis must be orthonormal");
        if (offset) detail::require(offset->size() == basis.rows(), "subspace offset dimension mismatch");
    }

    Index dim() const { return basis.rows(); }
    Index rank() const { return basis.cols(); }
};

// Union of affine subspaces (shape of affine j-subspace k-clustering).
struct SubspaceSet {
    std::vector<Subspace> flats;
};

using QueryShape = std::variant<CenterSet, Subspace, SubspaceSet>;

inline Index shape_dim(const QueryShape& shape) {
    return std::visit(
        [](const auto& s) -> Index {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SubspaceSet>) {
                if (s.flats.empty()) throw InvalidArgument("empty subspace set");
                return s.flats.front().dim();
            } else {
                return s.dim();
            }
        },
        shape);
}

namespace detail {

inline double point_to_centers(const Eigen::Ref<const Vector>& x, const Matrix& centers) {
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c)
        best = std::min(best, (centers.row(c).transpose() - x).squaredNorm());
    return best;
}

inline double point_to_subspace(const Eigen::Ref<const Vector>& x, const Subspace& s) {
    Vector r = s.offset ? Vector(x - *s.offset) : Vector(x);
    r -= s.basis * (s.basis.transpose() * r);
    return r.squaredNorm();
}

}  // namespace detail

// dist^2 of a single point to a shape.
inline double point_dist2(const Eigen::Ref<const Vector>& x, const QueryShape& shape) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CenterSet>) {
                return detail::point_to_centers(x, s.centers);
            } else if constexpr (std::is_same_v<T, Subspace>) {
                return detail::point_to_subspace(x, s);
            } else {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& f : s.flats) best = std::min(best, detail::point_to_subspace(x, f));
                return best;
            }
        },
        shape);
}

// sum_i w_i dist^2(row_i, shape); unit weights when `weights` is empty.
inline double dist2(const Matrix& rows, const Vector* weights, const QueryShape& shape) {
    if (shape_dim(shape) != rows.cols()) throw InvalidArgument("dist2: dimension mismatch between points and shape");
    if (weights && weights->size() != rows.rows()) throw InvalidArgument("dist2: weight count mismatch");
    double total = 0.0;
    for (Index i = 0; i < rows.rows(); ++i) {
        const double w = weights ? (*weights)(i) : 1.0;
        if (w == 0.0) continue;
        total += w * point_dist2(rows.row(i).transpose(), shape);
    }
    return total;
}

inline double dist2(const PointSet& points, const QueryShape& shape) {
    return dist2(points.rows(), points.weights() ? &*points.weights() : nullptr, shape);
}

}  // namespace tinycore
