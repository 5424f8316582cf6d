#pragma once

// Weighted k-means machinery: nearest-center assignment, D^2 seeding,
// Lloyd iteration and an exhaustive solver for tiny instances.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "tinycore/linalg.hpp"
#include "tinycore/random.hpp"

namespace tinycore {

struct Assignment {
    std::vector<Index> label;  // nearest center; lowest index wins ties
    Vector dist2;              // squared distance to that center
};

inline Assignment assign(const Matrix& rows, const Matrix& centers) {
    Assignment a;
    a.label.assign(static_cast<std::size_t>(rows.rows()), 0);
    a.dist2.resize(rows.rows());
    for (Index i = 0; i < rows.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Index arg = 0;
        for (Index c = 0; c < centers.rows(); ++c) {
            const double dd = (rows.row(i) - centers.row(c)).squaredNorm();
            if (dd < best) {
                best = dd;
                arg = c;
            }
        }
        a.label[static_cast<std::size_t>(i)] = arg;
        a.dist2(i) = best;
    }
    return a;
}

inline double kmeans_cost(const PointSet& points, const CenterSet& centers) { return dist2(points, centers); }

namespace detail {

// Index drawn with probability proportional to mass(i); uniform if mass is all zero.
inline Index draw_proportional(const Vector& mass, Rng& rng) {
    const double total = mass.sum();
    if (!(total > 0.0)) return static_cast<Index>(rng.below(static_cast<std::uint64_t>(mass.size())));
    const double target = rng.uniform() * total;
    double acc = 0.0;
    for (Index i = 0; i < mass.size(); ++i) {
        acc += mass(i);
        if (target < acc) return i;
    }
    for (Index i = mass.size() - 1; i >= 0; --i)
        if (mass(i) > 0.0) return i;
    return mass.size() - 1;
}

}  // namespace detail

// D^2 (k-means++) seeding on weighted points: first center proportional to
// weight, then proportional to weight times squared distance to the chosen set.
// Returns indices into the rows. Stops early once every point is covered.
inline std::vector<Index> d2_seeding(const PointSet& points, Index count, Rng& rng) {
    std::vector<Index> chosen;
    const Vector w = points.weight_vector();
    Vector best = Vector::Constant(points.size(), std::numeric_limits<double>::infinity());
    Index first = detail::draw_proportional(w, rng);
    chosen.push_back(first);
    for (;;) {
        const auto c = points.rows().row(chosen.back());
        for (Index i = 0; i < points.size(); ++i)
            best(i) = std::min(best(i), (points.rows().row(i) - c).squaredNorm());
        if (static_cast<Index>(chosen.size()) >= count) break;
        const Vector mass = w.cwiseProduct(best);
        if (!(mass.sum() > 0.0)) break;
        chosen.push_back(detail::draw_proportional(mass, rng));
    }
    return chosen;
}

// Weighted centroids of the labelled groups; `present[c]` is false for groups
// with zero total weight.
inline Matrix weighted_centroids(const PointSet& points, const std::vector<Index>& label, Index k,
                                 std::vector<bool>& present) {
    Matrix sums = Matrix::Zero(k, points.dim());
    Vector mass = Vector::Zero(k);
    for (Index i = 0; i < points.size(); ++i) {
        const Index c = label[static_cast<std::size_t>(i)];
        sums.row(c) += points.weight(i) * points.rows().row(i);
        mass(c) += points.weight(i);
    }
    present.assign(static_cast<std::size_t>(k), false);
    for (Index c = 0; c < k; ++c) {
        if (mass(c) > 0.0) {
            sums.row(c) /= mass(c);
            present[static_cast<std::size_t>(c)] = true;
        }
    }
    return sums;
}

struct LloydResult {
    CenterSet centers;
    std::vector<double> cost_history;  // cost after seeding, then after each update
    int iterations = 0;
};

inline LloydResult lloyd(const PointSet& points, Index k, std::uint64_t seed, int max_iters) {
    detail::require(k >= 1, "lloyd: k must be >= 1");
    detail::require(k <= points.size(), "lloyd: k must not exceed the number of points");
    detail::require(max_iters >= 0, "lloyd: max_iters must be >= 0");
    Rng rng(seed);
    std::vector<Index> seeds = d2_seeding(points, k, rng);
    Matrix centers(k, points.dim());
    for (Index c = 0; c < k; ++c) {
        // Fewer distinct points than k: duplicate seeds are harmless.
        const Index src = seeds[static_cast<std::size_t>(std::min<Index>(c, static_cast<Index>(seeds.size()) - 1))];
        centers.row(c) = points.rows().row(src);
    }

    const Vector w = points.weight_vector();
    LloydResult result;
    Assignment a = assign(points.rows(), centers);
    result.cost_history.push_back(w.dot(a.dist2));
    for (int it = 0; it < max_iters; ++it) {
        std::vector<bool> present;
        Matrix next = weighted_centroids(points, a.label, k, present);
        // Empty clusters jump to the point that currently pays the most.
        for (Index c = 0; c < k; ++c) {
            if (present[static_cast<std::size_t>(c)]) continue;
            Index worst = 0;
            double worst_cost = -1.0;
            for (Index i = 0; i < points.size(); ++i) {
                double nearest = std::numeric_limits<double>::infinity();
                for (Index o = 0; o < k; ++o)
                    if (present[static_cast<std::size_t>(o)])
                        nearest = std::min(nearest, (points.rows().row(i) - next.row(o)).squaredNorm());
                if (w(i) * nearest > worst_cost) {
                    worst_cost = w(i) * nearest;
                    worst = i;
                }
            }
            next.row(c) = points.rows().row(worst);
            present[static_cast<std::size_t>(c)] = true;
        }
        Assignment b = assign(points.rows(), next);
        centers = std::move(next);
        result.cost_history.push_back(w.dot(b.dist2));
        result.iterations = it + 1;
        const bool fixpoint = b.label == a.label;
        a = std::move(b);
        if (fixpoint) break;
    }
    result.centers = CenterSet(std::move(centers));
    return result;
}

inline CenterSet lloyd_solve(const PointSet& points, Index k, std::uint64_t seed, int max_iters) {
    return lloyd(points, k, seed, max_iters).centers;
}

// Best of several seeded Lloyd runs.
inline CenterSet lloyd_best_of(const PointSet& points, Index k, std::uint64_t seed, int restarts, int max_iters = 100) {
    CenterSet best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, restarts); ++r) {
        LloydResult res = lloyd(points, k, mix_seed(seed, static_cast<std::uint64_t>(r)), max_iters);
        const double c = res.cost_history.back();
        if (c < best_cost) {
            best_cost = c;
            best = std::move(res.centers);
        }
    }
    return best;
}

inline constexpr Index kBruteForceMaxPoints = 14;

namespace detail {

struct PartitionSearch {
    const Matrix& x;  // centered rows
    const Vector& w;
    Index k;
    Index n;
    std::vector<Index> label;
    std::vector<Index> best_label;
    double best = std::numeric_limits<double>::infinity();
    Matrix mean;
    Vector mass;
    Vector part_cost;

    void run(Index i, Index used, double cost) {
        if (cost >= best) return;
        if (n - i < k - used) return;  // not enough points left to open the remaining parts
        if (i == n) {
            best = cost;
            best_label = label;
            return;
        }
        const Index limit = std::min(used + 1, k);
        for (Index b = 0; b < limit; ++b) {
            const double wb = mass(b);
            const double wi = w(i);
            const Vector old_mean = mean.row(b).transpose();
            const double old_cost = part_cost(b);
            double added = 0.0;
            if (wb + wi > 0.0) {
                const Vector diff = x.row(i).transpose() - old_mean;
                added = wb > 0.0 ? wb * wi / (wb + wi) * diff.squaredNorm() : 0.0;
                mean.row(b) = (old_mean + (wi / (wb + wi)) * diff).transpose();
            } else if (wb == 0.0) {
                mean.row(b) = x.row(i);
            }
            mass(b) = wb + wi;
            part_cost(b) = old_cost + added;
            label[static_cast<std::size_t>(i)] = b;
            run(i + 1, b == used ? used + 1 : used, cost + added);
            mass(b) = wb;
            mean.row(b) = old_mean.transpose();
            part_cost(b) = old_cost;
        }
    }
};

}  // namespace detail

// Exact weighted k-means by branch-and-bound over all partitions into k parts;
// the optimal center of each part is its weighted centroid.
inline CenterSet brute_force_kmeans(const PointSet& points, Index k) {
    detail::require(k >= 1, "brute_force_kmeans: k must be >= 1");
    detail::require(k <= points.size(), "brute_force_kmeans: k must not exceed the number of points");
    if (points.size() > kBruteForceMaxPoints)
        throw ResourceLimit("brute_force_kmeans: exhaustive search is limited to 14 points");
    const Vector shift = points.rows().colwise().mean().transpose();
    const Matrix x = points.rows().rowwise() - shift.transpose();
    const Vector w = points.weight_vector();
    detail::PartitionSearch search{x, w, k, points.size(), {}, {}, std::numeric_limits<double>::infinity(),
                                   Matrix::Zero(k, points.dim()), Vector::Zero(k), Vector::Zero(k)};
    search.label.assign(static_cast<std::size_t>(points.size()), 0);
    search.run(0, 0, 0.0);

    std::vector<bool> present;
    Matrix centers = weighted_centroids(points, search.best_label, k, present);
    for (Index c = 0; c < k; ++c) {
        if (present[static_cast<std::size_t>(c)]) continue;
        // Zero-weight part: any member is optimal.
        for (Index i = 0; i < points.size(); ++i)
            if (search.best_label[static_cast<std::size_t>(i)] == c) {
                centers.row(c) = points.rows().row(i);
                break;
            }
    }
    return CenterSet(std::move(centers));
}

}  // namespace tinycore
