#pragma once

// Dimensionality reduction A -> (A^(m), Delta) for low-dimensional query shapes,
// plus lifting of coresets computed in the reduced coordinates.

#include <algorithm>
#include <cmath>
#include <optional>

#include "tinycore/coreset.hpp"

namespace tinycore {

enum class ReductionMode {
    general,       // m = ceil(8j/eps^2) - 1, shapes inside a j-subspace
    coreset_lift,  // m = j + ceil(32j/eps^2) - 1, before an eps/8 coreset
    kmeans,        // m = k + ceil(72k/eps^2) - 1
};

// A^(m) stored in the top-m right singular basis, with the discarded cost.
struct ReducedInstance {
    Matrix reduced_points;  // n x m coordinates (A V_m)
    Matrix basis;           // d x m, column-orthonormal
    double delta = 0.0;     // ||A - A^(m)||_F^2 (weighted)
    Index m = 0;
    std::optional<Vector> weights;

    PointSet reduced_set() const {
        if (weights) return PointSet(reduced_points, *weights);
        return PointSet(reduced_points);
    }

    // A^(m) in ambient coordinates.
    Matrix ambient() const { return reduced_points * basis.transpose(); }

    Vector lift_point(const Vector& y) const { return basis * y; }
};

// Unclamped dimension demanded by the mode's formula.
inline Index reduction_dimension_formula(ReductionMode mode, int j, double eps) {
    const double e2 = eps * eps;
    switch (mode) {
        case ReductionMode::general:
            return static_cast<Index>(ceil_tolerant(8.0 * j / e2) - 1);
        case ReductionMode::coreset_lift:
            return static_cast<Index>(j + ceil_tolerant(32.0 * j / e2) - 1);
        case ReductionMode::kmeans:
            return static_cast<Index>(j + ceil_tolerant(72.0 * j / e2) - 1);
    }
    return 0;
}

// Formula capped at min{n, d}, where the reduction is exact.
inline Index reduction_dimension(ReductionMode mode, int j, double eps, Index n, Index d) {
    return std::max<Index>(std::min({n, d, reduction_dimension_formula(mode, j, eps)}), 1);
}

// Projects onto the top-m right singular vectors of the weight-folded data.
inline ReducedInstance reduce_to_dimension(const PointSet& points, Index m) {
    const SvdFactors f = svd(points);
    if (m < 1 || m > f.sigma.size()) throw InvalidArgument("reduce: m must lie in [1, min(n, d)]");
    ReducedInstance r;
    r.m = m;
    r.basis = f.v.leftCols(m);
    r.reduced_points = points.rows() * r.basis;
    r.delta = f.tail_energy(m);
    r.weights = points.weights();
    return r;
}

inline ReducedInstance reduce(const PointSet& points, int j, double eps, ReductionMode mode) {
    if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("reduce: eps must lie in (0, 1]");
    detail::require(j >= 1, "reduce: j must be >= 1");
    return reduce_to_dimension(points, reduction_dimension(mode, j, eps, points.size(), points.dim()));
}

// eps * dist^2(a, C) + (1 + 1/eps) * ||a - b||_F^2, which bounds
// |dist^2(a, C) - dist^2(b, C)| for every non-empty C.
inline double weak_triangle_gap(const PointSet& a, const PointSet& b, const QueryShape& shape, double eps) {
    if (a.size() != b.size() || a.dim() != b.dim())
        throw InvalidArgument("weak_triangle_gap: point sets must have identical shape");
    detail::require(eps > 0.0, "weak_triangle_gap: eps must be > 0");
    const double move = (a.rows() - b.rows()).squaredNorm();
    return eps * dist2(a.rows(), nullptr, shape) + (1.0 + 1.0 / eps) * move;
}

// Maps a coreset of the reduced points back to R^d and adds the reduction cost.
inline Coreset lift_coreset(const Coreset& low, const ReducedInstance& reduced) {
    if (low.dim() != reduced.m || reduced.basis.cols() != reduced.m)
        throw InvalidArgument("lift_coreset: coreset dimension does not match the reduced basis");
    return Coreset(low.points * reduced.basis.transpose(), low.weights, low.delta + reduced.delta);
}

}  // namespace tinycore
