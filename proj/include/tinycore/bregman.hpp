#pragma once

// Clustering-feature coresets for k-clustering under m-similar Bregman
// divergences: recursively split with an (approximately) optimal k-clustering
// until a part is pseudo-random or the depth limit is reached, then keep one
// (centroid, weight, internal cost) feature per part.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tinycore/clustering.hpp"

namespace tinycore {

struct Divergence {
    enum class Kind { squared_euclidean, mahalanobis, custom };

    Kind kind = Kind::squared_euclidean;
    double m = 1.0;  // similarity: m d_B <= d_phi <= d_B
    Matrix B;        // d_B(x, y) = ||B (x - y)||^2; empty means identity
    std::function<double(const Vector&, const Vector&)> eval;

    static Divergence squared_euclidean() { return Divergence{}; }

    static Divergence mahalanobis(Matrix b) {
        detail::require(b.rows() == b.cols() && b.rows() >= 1, "mahalanobis: B must be square");
        detail::require(b.fullPivLu().isInvertible(), "mahalanobis: B must be regular");
        Divergence d;
        d.kind = Kind::mahalanobis;
        d.B = std::move(b);
        return d;
    }

    // Arbitrary evaluator with a declared Mahalanobis sandwich (B, m).
    static Divergence custom(std::function<double(const Vector&, const Vector&)> f, Matrix b, double m) {
        detail::require(m > 0.0 && m <= 1.0, "custom divergence: m must lie in (0, 1]");
        detail::require(b.rows() == b.cols() && b.rows() >= 1, "custom divergence: B must be square");
        Divergence d;
        d.kind = Kind::custom;
        d.B = std::move(b);
        d.m = m;
        d.eval = std::move(f);
        return d;
    }

    // d(p, q) = phi(p) - phi(q) - <grad phi(q), p - q>.
    static Divergence from_potential(std::function<double(const Vector&)> phi, std::function<Vector(const Vector&)> grad,
                                     Matrix b, double m) {
        auto f = [phi = std::move(phi), grad = std::move(grad)](const Vector& p, const Vector& q) {
            return std::max(0.0, phi(p) - phi(q) - grad(q).dot(p - q));
        };
        return custom(std::move(f), std::move(b), m);
    }

    double operator()(const Vector& p, const Vector& q) const {
        switch (kind) {
            case Kind::squared_euclidean:
                return (p - q).squaredNorm();
            case Kind::mahalanobis:
                return (B * (p - q)).squaredNorm();
            case Kind::custom:
                return eval(p, q);
        }
        return 0.0;
    }

    // The declared upper Mahalanobis distance.
    double upper(const Vector& p, const Vector& q) const {
        if (B.size() == 0) return (p - q).squaredNorm();
        return (B * (p - q)).squaredNorm();
    }
};

// Largest relative violation of m d_B <= d <= d_B over random pairs of rows
// and midpoints; 0 when the sandwich holds on every sample.
inline double similarity_violation(const Divergence& div, const PointSet& points, int samples, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    const auto n = static_cast<std::uint64_t>(points.size());
    for (int s = 0; s < samples; ++s) {
        const Vector p = points.rows().row(static_cast<Index>(rng.below(n))).transpose();
        Vector q = points.rows().row(static_cast<Index>(rng.below(n))).transpose();
        if (s % 2 == 1) q = 0.5 * (p + q);
        const double d = div(p, q);
        const double hi = div.upper(p, q);
        const double scale = std::max(hi, 1e-300);
        worst = std::max({worst, (d - hi) / scale, (div.m * hi - d) / scale});
    }
    return std::max(0.0, worst - 1e-12);
}

struct ClusteringFeature {
    Vector centroid;
    double weight = 0.0;
    double internal_cost = 0.0;  // sum of w_x d(x, centroid)
};

inline double divergence_to_centers(const Vector& x, const Matrix& centers, const Divergence& div) {
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c) best = std::min(best, div(x, centers.row(c).transpose()));
    return best;
}

inline double cf_cost(const ClusteringFeature& cf, const CenterSet& centers, const Divergence& div) {
    if (cf.centroid.size() != centers.dim()) throw InvalidArgument("cf_cost: dimension mismatch");
    return cf.internal_cost + cf.weight * divergence_to_centers(cf.centroid, centers.centers, div);
}

inline double cf_cost(const std::vector<ClusteringFeature>& cfs, const CenterSet& centers, const Divergence& div) {
    double s = 0.0;
    for (const auto& cf : cfs) s += cf_cost(cf, centers, div);
    return s;
}

// sum_x w_x min_c d(x, c).
inline double bregman_cost(const PointSet& points, const CenterSet& centers, const Divergence& div) {
    if (points.dim() != centers.dim()) throw InvalidArgument("bregman_cost: dimension mismatch");
    double s = 0.0;
    for (Index i = 0; i < points.size(); ++i) {
        const double w = points.weight(i);
        if (w == 0.0) continue;
        s += w * divergence_to_centers(points.rows().row(i).transpose(), centers.centers, div);
    }
    return s;
}

// 1-clustering cost of the given rows: the weighted centroid is optimal.
inline ClusteringFeature make_feature(const PointSet& points, const std::vector<Index>& rows, const Divergence& div) {
    ClusteringFeature cf;
    cf.centroid = Vector::Zero(points.dim());
    for (Index i : rows) {
        cf.weight += points.weight(i);
        cf.centroid += points.weight(i) * points.rows().row(i).transpose();
    }
    if (cf.weight > 0.0) {
        cf.centroid /= cf.weight;
    } else {
        for (Index i : rows) cf.centroid += points.rows().row(i).transpose();
        cf.centroid /= static_cast<double>(std::max<std::size_t>(rows.size(), 1));
    }
    for (Index i : rows) {
        const double w = points.weight(i);
        if (w > 0.0) cf.internal_cost += w * div(points.rows().row(i).transpose(), cf.centroid);
    }
    return cf;
}

struct Thresholds {
    double f1 = 0.0;       // f1(eps)
    double f1_half = 0.0;  // f1(eps / 2), used by the construction
    double nu = 0.0;       // ceil(log(1/f3) / log(1 + f1)) at eps / 2, f3 = f1
};

inline double niceness_f1(double eps, double m) {
    const double r = 1.0 + 4.0 / (m * eps);
    return 1.0 / (r * r);
}

inline Thresholds niceness_thresholds(double eps, double m) {
    detail::require(eps > 0.0 && eps < 1.0 + 1e-12, "niceness_thresholds: eps must lie in (0, 1]");
    detail::require(m > 0.0 && m <= 1.0, "niceness_thresholds: m must lie in (0, 1]");
    Thresholds t;
    t.f1 = niceness_f1(eps, m);
    t.f1_half = niceness_f1(eps / 2.0, m);
    t.nu = static_cast<double>(ceil_tolerant(std::log(1.0 / t.f1_half) / std::log1p(t.f1_half)));
    return t;
}

// Labels (0..k-1) of a k-clustering of the weighted points under div.
using BregmanSolver = std::function<std::vector<Index>(const PointSet&, Index k, const Divergence&)>;

namespace detail {

inline std::vector<Index> assign_divergence(const PointSet& points, const Matrix& centers, const Divergence& div,
                                            double* cost = nullptr) {
    std::vector<Index> label(static_cast<std::size_t>(points.size()), 0);
    double total = 0.0;
    for (Index i = 0; i < points.size(); ++i) {
        const Vector x = points.rows().row(i).transpose();
        double best = std::numeric_limits<double>::infinity();
        for (Index c = 0; c < centers.rows(); ++c) {
            const double dd = div(x, centers.row(c).transpose());
            if (dd < best) {
                best = dd;
                label[static_cast<std::size_t>(i)] = c;
            }
        }
        total += points.weight(i) * best;
    }
    if (cost) *cost = total;
    return label;
}

inline double partition_cost(const PointSet& points, const std::vector<Index>& label, Index k, const Divergence& div) {
    std::vector<std::vector<Index>> parts(static_cast<std::size_t>(k));
    for (Index i = 0; i < points.size(); ++i) parts[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(i);
    double s = 0.0;
    for (const auto& p : parts)
        if (!p.empty()) s += make_feature(points, p, div).internal_cost;
    return s;
}

struct BregmanSearch {
    const PointSet& points;
    const Divergence& div;
    Index k;
    std::vector<std::vector<Index>> parts;
    std::vector<double> part_cost;
    std::vector<Index> label;
    std::vector<Index> best_label;
    double best;

    void run(Index i, double cost) {
        if (cost >= best) return;
        const Index used = static_cast<Index>(std::count_if(parts.begin(), parts.end(), [](const auto& p) { return !p.empty(); }));
        if (points.size() - i < k - used) return;
        if (i == points.size()) {
            best = cost;
            best_label = label;
            return;
        }
        const Index limit = std::min(used + 1, k);
        for (Index b = 0; b < limit; ++b) {
            auto& part = parts[static_cast<std::size_t>(b)];
            const double old = part_cost[static_cast<std::size_t>(b)];
            part.push_back(i);
            const double now = make_feature(points, part, div).internal_cost;
            part_cost[static_cast<std::size_t>(b)] = now;
            label[static_cast<std::size_t>(i)] = b;
            run(i + 1, cost - old + now);
            part.pop_back();
            part_cost[static_cast<std::size_t>(b)] = old;
        }
    }
};

}  // namespace detail

// Lloyd iteration under the divergence (centroids stay optimal by the
// centroid identity), seeded by divergence-weighted D^2 sampling.
inline std::vector<Index> bregman_lloyd(const PointSet& points, Index k, const Divergence& div, std::uint64_t seed,
                                        int max_iters = 50) {
    detail::require(k >= 1 && k <= points.size(), "bregman_lloyd: k must lie in [1, n]");
    Rng rng(seed);
    const Vector w = points.weight_vector();
    Matrix centers(k, points.dim());
    Vector best = Vector::Constant(points.size(), std::numeric_limits<double>::infinity());
    Index pick = detail::draw_proportional(w, rng);
    for (Index c = 0; c < k; ++c) {
        centers.row(c) = points.rows().row(pick);
        for (Index i = 0; i < points.size(); ++i)
            best(i) = std::min(best(i), div(points.rows().row(i).transpose(), centers.row(c).transpose()));
        pick = detail::draw_proportional(w.cwiseProduct(best), rng);
    }
    std::vector<Index> label = detail::assign_divergence(points, centers, div);
    for (int it = 0; it < max_iters; ++it) {
        std::vector<bool> present;
        Matrix next = weighted_centroids(points, label, k, present);
        for (Index c = 0; c < k; ++c)
            if (!present[static_cast<std::size_t>(c)]) next.row(c) = centers.row(c);
        std::vector<Index> relabel = detail::assign_divergence(points, next, div);
        centers = std::move(next);
        if (relabel == label) break;
        label = std::move(relabel);
    }
    return label;
}

inline constexpr Index kBregmanExactMaxPoints = 12;

// Exact optimal partition by branch-and-bound (costs only grow as points join a part).
inline std::vector<Index> bregman_brute_force(const PointSet& points, Index k, const Divergence& div) {
    detail::require(k >= 1 && k <= points.size(), "bregman_brute_force: k must lie in [1, n]");
    if (points.size() > kBregmanExactMaxPoints)
        throw ResourceLimit("bregman_brute_force: exhaustive search is limited to 12 points");
    std::vector<Index> start = bregman_lloyd(points, k, div, 0x5eed);
    detail::BregmanSearch s{points, div, k, std::vector<std::vector<Index>>(static_cast<std::size_t>(k)),
                            std::vector<double>(static_cast<std::size_t>(k), 0.0),
                            std::vector<Index>(static_cast<std::size_t>(points.size()), 0), start,
                            std::nextafter(detail::partition_cost(points, start, k, div), std::numeric_limits<double>::infinity())};
    s.run(0, 0.0);
    return s.best_label;
}

// Brute force on small parts, best of several Lloyd runs otherwise.
inline BregmanSolver default_bregman_solver(std::uint64_t seed = 0, int restarts = 5) {
    return [seed, restarts](const PointSet& points, Index k, const Divergence& div) {
        k = std::min(k, points.size());
        if (points.size() <= kBregmanExactMaxPoints) return bregman_brute_force(points, k, div);
        std::vector<Index> best;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int r = 0; r < restarts; ++r) {
            std::vector<Index> l = bregman_lloyd(points, k, div, mix_seed(seed, static_cast<std::uint64_t>(r)));
            const double c = detail::partition_cost(points, l, k, div);
            if (c < best_cost) {
                best_cost = c;
                best = std::move(l);
            }
        }
        return best;
    };
}

struct PartitionLeaf {
    std::vector<Index> rows;  // indices into the original points
    int depth = 0;
    bool pseudo_random = false;  // stopped by the cost test rather than the depth limit
};

struct SplitRecord {
    int depth = 0;
    double parent_cost = 0.0;    // opt_1 of the split set
    double children_cost = 0.0;  // sum of opt_1 over its parts
};

struct PartitionResult {
    std::vector<PartitionLeaf> leaves;
    std::vector<SplitRecord> splits;
    int max_depth = 0;
};

namespace detail {

inline void partition_recurse(const PointSet& points, const std::vector<Index>& rows, Index k, int t, int nu, double f1,
                              const BregmanSolver& solver, const Divergence& div, PartitionResult& out) {
    out.max_depth = std::max(out.max_depth, t);
    const PointSet sub = points.subset(rows);
    const double opt1 = make_feature(points, rows, div).internal_cost;
    const std::vector<Index> label = solver(sub, std::min(k, sub.size()), div);
    std::vector<std::vector<Index>> parts(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < rows.size(); ++i) parts[static_cast<std::size_t>(label[i])].push_back(rows[i]);
    double children = 0.0;
    for (const auto& p : parts)
        if (!p.empty()) children += make_feature(points, p, div).internal_cost;

    const bool pseudo_random = opt1 <= (1.0 + f1) * children;
    if (t >= nu || pseudo_random) {
        out.leaves.push_back(PartitionLeaf{rows, t, pseudo_random});
        return;
    }
    out.splits.push_back(SplitRecord{t, opt1, children});
    for (const auto& p : parts)
        if (!p.empty()) partition_recurse(points, p, k, t + 1, nu, f1, solver, div, out);
}

}  // namespace detail

// Leaves partition the rows exactly; none is deeper than nu.
inline PartitionResult partition_helper(const PointSet& points, Index k, int t, int nu, double f1,
                                        const BregmanSolver& solver, const Divergence& div) {
    detail::require(k >= 1, "partition_helper: k must be >= 1");
    detail::require(t >= 0 && t <= nu, "partition_helper: level must lie in [0, nu]");
    std::vector<Index> all(static_cast<std::size_t>(points.size()));
    for (Index i = 0; i < points.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    PartitionResult out;
    detail::partition_recurse(points, all, k, t, nu, f1, solver, div, out);
    return out;
}

inline constexpr int kMaxNu = 12;

struct BregmanCoreset {
    std::vector<ClusteringFeature> features;
    Thresholds thresholds;
    int nu = 0;  // depth limit actually used
    PartitionResult partition;
    std::vector<std::string> diagnostics;

    double cost(const CenterSet& centers, const Divergence& div) const { return cf_cost(features, centers, div); }
};

inline BregmanCoreset bregman_coreset(const PointSet& points, Index k, double eps, const Divergence& div,
                                      const BregmanSolver& solver = default_bregman_solver()) {
    detail::require(k >= 1, "bregman_coreset: k must be >= 1");
    detail::require(eps > 0.0 && eps < 1.0, "bregman_coreset: eps must lie in (0, 1)");
    BregmanCoreset out;
    out.thresholds = niceness_thresholds(eps, div.m);
    out.nu = static_cast<int>(std::min<double>(out.thresholds.nu, kMaxNu));
    if (out.thresholds.nu > kMaxNu)
        out.diagnostics.push_back("depth limit " + std::to_string(static_cast<long long>(out.thresholds.nu)) +
                                  " capped at " + std::to_string(kMaxNu));
    if (div.kind == Divergence::Kind::custom && similarity_violation(div, points, 256, 0x51) > 0.0)
        out.diagnostics.push_back("custom divergence violates its declared similarity sandwich on sampled pairs");

    if (points.size() <= k) {
        for (Index i = 0; i < points.size(); ++i) {
            out.partition.leaves.push_back(PartitionLeaf{{i}, 0, true});
            if (points.weight(i) > 0.0) out.features.push_back(make_feature(points, {i}, div));
        }
        return out;
    }
    out.partition = partition_helper(points, k, 0, out.nu, out.thresholds.f1_half, solver, div);
    for (const auto& leaf : out.partition.leaves) {
        ClusteringFeature cf = make_feature(points, leaf.rows, div);
        if (cf.weight > 0.0) out.features.push_back(std::move(cf));
    }
    return out;
}

}  // namespace tinycore
