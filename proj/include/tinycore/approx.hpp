#pragma once

// Approximate C-clustering through a rank-m projection and an eps/8 coreset:
// solve on the small weighted instance, then map the shape back to R^d.

#include <cstdint>
#include <functional>
#include <limits>
#include <variant>

#include "tinycore/kmeans_coreset.hpp"
#include "tinycore/subspace_coreset.hpp"

namespace tinycore {

struct KMeansProblem {
    Index k = 1;
};

// k affine j-flats.
struct AffineProblem {
    int j = 1;
    Index k = 1;
};

using Problem = std::variant<KMeansProblem, AffineProblem>;

// Solves the problem on a weighted point set in whatever dimension it is given.
using Solver = std::function<QueryShape(const PointSet&, const Problem&, std::uint64_t seed)>;

// Best weighted affine j-flat: mean plus the top-j right singular vectors.
inline Subspace fit_flat(const PointSet& points, int j) {
    detail::require(j >= 1 && j <= points.dim() - 1, "fit_flat: j must lie in [1, d - 1]");
    const Vector mu = points.total_weight() > 0.0 ? points.mean() : Vector(points.rows().colwise().mean().transpose());
    Matrix centered = points.rows().rowwise() - mu.transpose();
    if (points.weighted()) centered = weighted_fold(centered, *points.weights());
    const SvdFactors f = svd(centered);
    Matrix basis(points.dim(), j);
    if (f.v.cols() >= j) {
        basis = f.v.leftCols(j);
    } else {
        // Fewer rows than j: complete with any orthonormal directions.
        Matrix seed = Matrix::Identity(points.dim(), j);
        seed.leftCols(f.v.cols()) = f.v;
        basis = orthonormalize(seed);
    }
    return Subspace(orthonormalize(basis), mu);
}

// Alternating fit/assign for k affine j-flats, seeded from a k-means solution.
inline SubspaceSet affine_flats_lloyd(const PointSet& points, int j, Index k, std::uint64_t seed, int max_iters = 50) {
    detail::require(k >= 1 && k <= points.size(), "affine_flats_lloyd: k must lie in [1, n]");
    const CenterSet start = lloyd_solve(points, k, seed, 20);
    std::vector<Index> label = assign(points.rows(), start.centers).label;
    SubspaceSet best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        SubspaceSet flats;
        for (Index c = 0; c < k; ++c) {
            std::vector<Index> members;
            for (Index i = 0; i < points.size(); ++i)
                if (label[static_cast<std::size_t>(i)] == c) members.push_back(i);
            if (members.empty()) members.push_back(static_cast<Index>(c % points.size()));
            flats.flats.push_back(fit_flat(points.subset(members), j));
        }
        std::vector<Index> next(label.size());
        for (Index i = 0; i < points.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (Index c = 0; c < k; ++c) {
                const double dd = detail::point_to_subspace(points.rows().row(i).transpose(), flats.flats[static_cast<std::size_t>(c)]);
                if (dd < nearest) {
                    nearest = dd;
                    next[static_cast<std::size_t>(i)] = c;
                }
            }
        }
        const double c = dist2(points, flats);
        if (c < best_cost) {
            best_cost = c;
            best = flats;
        }
        if (next == label) break;
        label = std::move(next);
    }
    return best;
}

// Exact for k-means on at most 14 points and for a single flat; Lloyd-style otherwise.
inline Solver default_solver(int restarts = 5) {
    return [restarts](const PointSet& points, const Problem& problem, std::uint64_t seed) -> QueryShape {
        if (const auto* km = std::get_if<KMeansProblem>(&problem)) {
            if (points.size() <= kBruteForceMaxPoints) return brute_force_kmeans(points, km->k);
            return lloyd_best_of(points, km->k, seed, restarts);
        }
        const auto& af = std::get<AffineProblem>(problem);
        if (af.k == 1) return SubspaceSet{{fit_flat(points, af.j)}};
        SubspaceSet best;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int r = 0; r < restarts; ++r) {
            SubspaceSet s = affine_flats_lloyd(points, af.j, af.k, mix_seed(seed, static_cast<std::uint64_t>(r)));
            const double c = dist2(points, s);
            if (c < best_cost) {
                best_cost = c;
                best = std::move(s);
            }
        }
        return best;
    };
}

namespace detail {

inline Subspace lift_flat(const Subspace& s, const Matrix& basis) {
    std::optional<Vector> offset;
    if (s.offset) offset = basis * *s.offset;
    return Subspace(orthonormalize(basis * s.basis), offset);
}

inline QueryShape lift_shape(const QueryShape& shape, const Matrix& basis) {
    return std::visit(
        [&](const auto& s) -> QueryShape {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CenterSet>) {
                return CenterSet(s.centers * basis.transpose());
            } else if constexpr (std::is_same_v<T, Subspace>) {
                return lift_flat(s, basis);
            } else {
                SubspaceSet out;
                for (const auto& f : s.flats) out.flats.push_back(lift_flat(f, basis));
                return out;
            }
        },
        shape);
}

}  // namespace detail

// Projection dimension K + ceil(16(K+1)/eps^2) capped at min{n, d}, with
// K = k for k-means and K = k(j+1) for affine flats.
inline Index approx_dimension(const Problem& problem, double eps, Index n, Index d) {
    const Index kk = std::visit(
        [](const auto& p) -> Index {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, KMeansProblem>) return p.k;
            else return p.k * (p.j + 1);
        },
        problem);
    const Index formula = kk + ceil_tolerant(16.0 * static_cast<double>(kk + 1) / (eps * eps));
    return std::min({n, d, formula});
}

// The shape returned satisfies dist^2(A, C) <= alpha (1 + eps) / (1 - eps) opt
// when the solver is an alpha-approximation.
inline QueryShape approx_solution(const PointSet& points, const Problem& problem, double eps, const Solver& solver,
                                  std::uint64_t seed = 0, double delta = 0.1) {
    detail::require(eps > 0.0 && eps <= 0.5, "approx_solution: eps must lie in (0, 1/2]");
    Index k = 1;
    int j = 0;
    if (const auto* km = std::get_if<KMeansProblem>(&problem)) {
        k = km->k;
    } else {
        const auto& af = std::get<AffineProblem>(problem);
        k = af.k;
        j = af.j;
        detail::require(j >= 1 && j <= points.dim() - 1, "approx_solution: j must lie in [1, d - 1]");
    }
    detail::require(k >= 1 && k <= points.size(), "approx_solution: k must lie in [1, n]");

    // Projection is skipped when it keeps every dimension or leaves too little room for a flat.
    const Index m = approx_dimension(problem, eps, points.size(), points.dim());
    const bool project = m < points.dim() && m > j;
    std::optional<ReducedInstance> red;
    PointSet low = points;
    if (project) {
        red = reduce_to_dimension(points, m);
        low = red->reduced_set();
    }

    Coreset summary;
    if (j == 0) {
        summary = kmeans_coreset(low, k, eps / 8.0, delta, mix_seed(seed, 11));
    } else if (k == 1) {
        summary = affine_subspace_coreset_weighted(low, j, eps / 8.0);
    } else {
        summary = identity_coreset(low);
    }
    if (summary.size() < k) summary = identity_coreset(low);
    const QueryShape shape = solver(summary.as_point_set(), problem, mix_seed(seed, 12));
    if (shape_dim(shape) != low.dim()) throw InvalidArgument("approx_solution: solver returned a shape of the wrong dimension");
    if (!red) return shape;
    return detail::lift_shape(shape, red->basis);
}

}  // namespace tinycore
