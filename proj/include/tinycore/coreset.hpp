#pragma once

#include <utility>

#include "tinycore/linalg.hpp"

namespace tinycore {

// Weighted summary (S, w, delta). Its cost against a shape C is
// sum_i w_i dist^2(S_i, C) + delta.
struct Coreset {
    Matrix points;
    Vector weights;
    double delta = 0.0;

    Coreset() = default;
    Coreset(Matrix s, Vector w, double offset) : points(std::move(s)), weights(std::move(w)), delta(offset) {
        validate();
    }

    Index size() const { return points.rows(); }
    Index dim() const { return points.cols(); }
    double total_weight() const { return weights.sum(); }

    void validate() const {
        detail::require_input(points.rows() >= 1, "coreset must contain at least one point");
        detail::require_input(weights.size() == points.rows(), "coreset weight count mismatch");
        detail::require_input(all_finite(points), "coreset points must be finite");
        detail::require_input(weights.allFinite() && (weights.array() >= 0.0).all(),
                              "coreset weights must be finite and non-negative");
        detail::require_input(std::isfinite(delta) && delta >= 0.0, "coreset offset must be finite and >= 0");
    }

    // Points and weights as a plain weighted set (offset dropped).
    PointSet as_point_set() const { return PointSet(points, weights); }
};

// The input itself as a zero-offset coreset.
inline Coreset identity_coreset(const PointSet& p) { return Coreset(p.rows(), p.weight_vector(), 0.0); }

inline double cost(const Coreset& c, const QueryShape& shape) {
    return dist2(c.points, &c.weights, shape) + c.delta;
}

// Union of two summaries; offsets add.
inline Coreset merge(const Coreset& a, const Coreset& b) {
    if (a.dim() != b.dim()) throw InvalidArgument("merge: dimension mismatch");
    Matrix s(a.size() + b.size(), a.dim());
    s << a.points, b.points;
    Vector w(a.size() + b.size());
    w << a.weights, b.weights;
    return Coreset(std::move(s), std::move(w), a.delta + b.delta);
}

}  // namespace tinycore
