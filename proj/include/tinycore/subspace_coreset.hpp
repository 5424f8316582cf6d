#pragma once

// Coresets for the linear and affine j-subspace problems.
//
// The linear construction keeps the first m rows of Sigma^(m) V^T and charges
// the discarded spectrum ||A - A^(m)||_F^2 to the offset. The affine one
// centers the data, builds the linear coreset, mirrors it (S', -S') so the
// coreset mean is the data mean, and rescales so that translating the query
// moves both costs by the same amount.

#include <algorithm>
#include <cmath>

#include "tinycore/coreset.hpp"

namespace tinycore {

// Coreset rows needed for a (1+eps) guarantee: j + ceil(j/eps) - 1.
inline Index coreset_size_linear(int j, double eps) {
    detail::require(j >= 1, "coreset_size_linear: j must be >= 1");
    detail::require(eps > 0.0, "coreset_size_linear: eps must be > 0");
    return static_cast<Index>(j + ceil_tolerant(static_cast<double>(j) / eps) - 1);
}

namespace detail {

inline void check_subspace_args(Index d, int j, double eps) {
    require(j >= 1, "subspace coreset: j must be >= 1");
    require(static_cast<Index>(j) <= d - 1, "subspace coreset: j must be <= d - 1");
    require(eps > 0.0 && std::isfinite(eps), "subspace coreset: eps must be > 0");
}

// Linear coreset of a plain matrix (rows already weight-folded).
inline Coreset linear_coreset_of_matrix(const Matrix& a, int j, double eps) {
    check_subspace_args(a.cols(), j, eps);
    const Index m = std::min({a.rows(), a.cols(), coreset_size_linear(j, eps)});
    const SvdFactors f = svd(a);
    Matrix s = f.sigma.head(m).asDiagonal() * f.v.leftCols(m).transpose();
    return Coreset(std::move(s), Vector::Ones(m), f.tail_energy(m));
}

}  // namespace detail

// Weighted inputs are folded (row i scaled by sqrt(w_i)) before the SVD.
inline Coreset linear_subspace_coreset(const PointSet& points, int j, double eps) {
    return detail::linear_coreset_of_matrix(weighted_fold(points), j, eps);
}

inline Coreset affine_subspace_coreset_weighted(const PointSet& points, int j, double eps) {
    detail::check_subspace_args(points.dim(), j, eps);
    const double total = points.total_weight();
    detail::require_input(total > 0.0, "affine coreset: total weight must be positive");
    const Vector mu = points.mean();
    Matrix centered = points.rows().rowwise() - mu.transpose();
    if (points.weighted()) centered = weighted_fold(centered, *points.weights());

    const Coreset inner = detail::linear_coreset_of_matrix(centered, j, eps);
    const Index m = inner.size();
    const double scale = std::sqrt(static_cast<double>(m) / total);
    Matrix s(2 * m, points.dim());
    s.topRows(m) = (scale * inner.points).rowwise() + mu.transpose();
    s.bottomRows(m) = (-scale * inner.points).rowwise() + mu.transpose();
    return Coreset(std::move(s), Vector::Constant(2 * m, total / (2.0 * static_cast<double>(m))), inner.delta);
}

inline Coreset affine_subspace_coreset(const PointSet& points, int j, double eps) {
    return affine_subspace_coreset_weighted(points, j, eps);
}

}  // namespace tinycore
