#pragma once

// Sensitivity sampling: upper bounds on point sensitivities for k-means (from a
// bicriteria solution) or by a movement argument, the VC sample size, and the
// sampler that keeps heavy points deterministically and draws the rest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tinycore/clustering.hpp"
#include "tinycore/coreset.hpp"

namespace tinycore {

struct SensitivityConstants {
    double c_s = 8.0;    // scale of the per-point bound
    double c_tot = 64.0; // asserted ceiling: total <= c_tot * beta * k
    double c_vc = 1.0;   // sample size multiplier
    double c_dim = 1.0;  // VC dimension multiplier
    int beta = 2;        // bicriteria centers per requested center
};

struct SensitivityProfile {
    Vector sigma;
    double total = 0.0;

    SensitivityProfile() = default;
    explicit SensitivityProfile(Vector s) : sigma(std::move(s)), total(sigma.sum()) {
        detail::require_input(sigma.size() >= 1, "sensitivity profile must not be empty");
        detail::require_input(sigma.allFinite() && (sigma.array() >= 0.0).all(),
                              "sensitivities must be finite and non-negative");
    }
    Index size() const { return sigma.size(); }
};

struct BicriteriaSolution {
    Matrix centers;
    std::vector<Index> assignment;
    Vector dist2;          // squared distance of each point to its center
    Vector cluster_costs;  // weighted
    Vector cluster_sizes;  // weighted

    double cost() const { return cluster_costs.sum(); }
};

namespace detail {

inline BicriteriaSolution summarize(const PointSet& points, Matrix centers) {
    BicriteriaSolution b;
    Assignment a = assign(points.rows(), centers);
    const Index c = centers.rows();
    b.centers = std::move(centers);
    b.cluster_costs = Vector::Zero(c);
    b.cluster_sizes = Vector::Zero(c);
    for (Index i = 0; i < points.size(); ++i) {
        const Index l = a.label[static_cast<std::size_t>(i)];
        b.cluster_costs(l) += points.weight(i) * a.dist2(i);
        b.cluster_sizes(l) += points.weight(i);
    }
    b.assignment = std::move(a.label);
    b.dist2 = std::move(a.dist2);
    return b;
}

}  // namespace detail

// D^2 seeding of beta*k centers followed by one Lloyd step; the cheapest of
// ceil(log2(1/delta)) independent repetitions is kept.
inline BicriteriaSolution bicriteria_kmeans(const PointSet& points, Index k, double delta, std::uint64_t seed,
                                            int beta = 2) {
    detail::require(k >= 1, "bicriteria_kmeans: k must be >= 1");
    detail::require(k <= points.size(), "bicriteria_kmeans: k must not exceed the number of points");
    detail::require(delta > 0.0 && delta < 1.0, "bicriteria_kmeans: delta must lie in (0, 1)");
    detail::require(beta >= 1, "bicriteria_kmeans: beta must be >= 1");
    const int reps = std::max(1, static_cast<int>(ceil_tolerant(std::log2(1.0 / delta))));
    const Index want = std::min<Index>(static_cast<Index>(beta) * k, points.size());

    BicriteriaSolution best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        const std::vector<Index> idx = d2_seeding(points, want, rng);
        const Index c = static_cast<Index>(idx.size());
        Matrix centers(c, points.dim());
        for (Index i = 0; i < c; ++i) centers.row(i) = points.rows().row(idx[static_cast<std::size_t>(i)]);

        const Assignment a = assign(points.rows(), centers);
        std::vector<bool> present;
        Matrix moved = weighted_centroids(points, a.label, c, present);
        for (Index i = 0; i < c; ++i)
            if (!present[static_cast<std::size_t>(i)]) moved.row(i) = centers.row(i);

        BicriteriaSolution sol = detail::summarize(points, std::move(moved));
        if (sol.cost() < best_cost) {
            best_cost = sol.cost();
            best = std::move(sol);
        }
    }
    return best;
}

// sigma_i = c_s * (w_i / |J_i|_w + w_i dist^2(p_i, C') / cost(A, C')).
// Zero-weight points get zero sensitivity and are never sampled.
inline SensitivityProfile kmeans_sensitivities(const PointSet& points, const BicriteriaSolution& bic,
                                               const SensitivityConstants& k = {}) {
    if (static_cast<Index>(bic.assignment.size()) != points.size() || bic.dist2.size() != points.size())
        throw InvalidArgument("kmeans_sensitivities: bicriteria solution does not match the points");
    const double total_cost = bic.cost();
    Vector s(points.size());
    for (Index i = 0; i < points.size(); ++i) {
        const double w = points.weight(i);
        const double size = bic.cluster_sizes(bic.assignment[static_cast<std::size_t>(i)]);
        double v = size > 0.0 ? w / size : 0.0;
        if (total_cost > 0.0) v += w * bic.dist2(i) / total_cost;
        s(i) = k.c_s * v;
    }
    SensitivityProfile p(std::move(s));
    detail::require_input(p.total > 0.0, "kmeans_sensitivities: total weight must be positive");
    return p;
}

// (4 + 4 alpha)(sigma_b,i + w_i ||a_i - b_i||^2 / opt).
inline SensitivityProfile movement_sensitivities(const PointSet& a, const PointSet& b, const SensitivityProfile& profile_b,
                                                 double opt_cost, double alpha) {
    if (a.size() != b.size() || a.dim() != b.dim() || profile_b.size() != a.size())
        throw InvalidArgument("movement_sensitivities: point sets and profile must have matching shapes");
    if (!(opt_cost > 0.0) || !std::isfinite(opt_cost))
        throw InvalidInput("movement_sensitivities: opt_cost must be positive");
    detail::require(alpha >= 0.0, "movement_sensitivities: alpha must be >= 0");
    const Vector w = a.weight_vector();
    const Vector moved = (a.rows() - b.rows()).rowwise().squaredNorm();
    const double budget = w.dot(moved);
    detail::require(budget <= alpha * opt_cost * (1.0 + 1e-9) + 1e-300,
                    "movement_sensitivities: total movement exceeds alpha * opt_cost");
    const Vector s = (4.0 + 4.0 * alpha) * (profile_b.sigma + w.cwiseProduct(moved) / opt_cost);
    return SensitivityProfile(s);
}

// ceil(c_vc * S/eps^2 * (dim * log2(max(S, 2)) + log2(1/delta))).
inline std::int64_t vc_sample_size(double total, std::int64_t dim_bound, double eps, double delta, double c_vc = 1.0) {
    detail::require(total > 0.0 && std::isfinite(total), "vc_sample_size: total sensitivity must be positive");
    detail::require(dim_bound >= 1, "vc_sample_size: dim_bound must be >= 1");
    detail::require(eps > 0.0 && eps <= 1.0, "vc_sample_size: eps must lie in (0, 1]");
    detail::require(delta > 0.0 && delta < 1.0, "vc_sample_size: delta must lie in (0, 1)");
    detail::require(c_vc > 0.0, "vc_sample_size: c_vc must be positive");
    const double s = c_vc * total / (eps * eps) *
                     (static_cast<double>(dim_bound) * std::log2(std::max(total, 2.0)) + std::log2(1.0 / delta));
    if (!(s < 4.0e18)) throw ResourceLimit("vc_sample_size: sample size overflows");
    return static_cast<std::int64_t>(ceil_tolerant(s));
}

// ceil(c_dim * d * k * log2(k + 1)) for k point centers in R^d.
inline std::int64_t kmeans_dim_bound(Index d, Index k, double c_dim = 1.0) {
    detail::require(d >= 1 && k >= 1, "kmeans_dim_bound: d and k must be >= 1");
    return std::max<std::int64_t>(
        1, static_cast<std::int64_t>(ceil_tolerant(c_dim * static_cast<double>(d * k) * std::log2(k + 1.0))));
}

struct Renormalized {
    std::vector<bool> forced;  // kept deterministically
    Vector sigma1;             // sampling sensitivities; zero on forced and zero-weight points
    double total = 0.0;        // S, the mass the sampled part must carry
    bool feasible = false;     // false when fewer than s points remain to sample from
};

// Points with sigma/S > 1/s are forced. The others get sigma1 >= sigma,
// sigma1 <= S/s and sum sigma1 = S: proportional water-filling for up to 64
// rounds, then any remainder goes out in proportion to the remaining headroom.
inline Renormalized renormalize_sensitivities(const SensitivityProfile& profile, const Vector& weights, std::int64_t s) {
    detail::require(s >= 1, "renormalize_sensitivities: s must be >= 1");
    if (!(profile.total > 0.0)) throw InvalidInput("sensitivity profile has non-positive total");
    const Index n = profile.size();
    const double total = profile.total;
    const double cap = total / static_cast<double>(s);
    Renormalized r;
    r.total = total;
    r.forced.assign(static_cast<std::size_t>(n), false);
    r.sigma1 = Vector::Zero(n);
    std::vector<Index> pool;
    for (Index i = 0; i < n; ++i) {
        if (profile.sigma(i) / total > 1.0 / static_cast<double>(s)) {
            r.forced[static_cast<std::size_t>(i)] = true;
        } else if (weights(i) > 0.0 && profile.sigma(i) > 0.0) {
            r.sigma1(i) = profile.sigma(i);
            pool.push_back(i);
        }
    }
    if (static_cast<std::int64_t>(pool.size()) < s) return r;
    r.feasible = true;

    for (int round = 0; round < 64; ++round) {
        double placed = 0.0, open = 0.0;
        for (Index i : pool) {
            placed += r.sigma1(i);
            if (r.sigma1(i) < cap) open += r.sigma1(i);
        }
        const double left = total - placed;
        if (left <= total * 1e-15 || open <= 0.0) break;
        const double factor = 1.0 + left / open;
        for (Index i : pool)
            if (r.sigma1(i) < cap) r.sigma1(i) = std::min(cap, r.sigma1(i) * factor);
    }
    double placed = 0.0, room = 0.0;
    for (Index i : pool) {
        placed += r.sigma1(i);
        room += cap - r.sigma1(i);
    }
    const double left = total - placed;
    if (left > 0.0 && room > 0.0) {
        const double share = std::min(1.0, left / room);
        for (Index i : pool) r.sigma1(i) += share * (cap - r.sigma1(i));
    }
    return r;
}

// Vose alias table over non-negative masses.
class AliasTable {
public:
    explicit AliasTable(const Vector& mass) {
        const Index n = mass.size();
        detail::require(n >= 1, "AliasTable: empty distribution");
        const double total = mass.sum();
        detail::require(total > 0.0, "AliasTable: distribution has zero mass");
        prob_.assign(static_cast<std::size_t>(n), 1.0);
        alias_.resize(static_cast<std::size_t>(n));
        std::vector<double> scaled(static_cast<std::size_t>(n));
        std::vector<Index> small, large;
        for (Index i = 0; i < n; ++i) {
            scaled[static_cast<std::size_t>(i)] = mass(i) * static_cast<double>(n) / total;
            alias_[static_cast<std::size_t>(i)] = i;
            (scaled[static_cast<std::size_t>(i)] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const Index lo = small.back();
            small.pop_back();
            const Index hi = large.back();
            prob_[static_cast<std::size_t>(lo)] = scaled[static_cast<std::size_t>(lo)];
            alias_[static_cast<std::size_t>(lo)] = hi;
            scaled[static_cast<std::size_t>(hi)] += scaled[static_cast<std::size_t>(lo)] - 1.0;
            if (scaled[static_cast<std::size_t>(hi)] < 1.0) {
                large.pop_back();
                small.push_back(hi);
            }
        }
        // Leftovers are 1 up to rounding.
        for (Index i : small) prob_[static_cast<std::size_t>(i)] = 1.0;
        for (Index i : large) prob_[static_cast<std::size_t>(i)] = 1.0;
    }

    Index sample(Rng& rng) const {
        const auto col = static_cast<std::size_t>(rng.below(prob_.size()));
        return rng.uniform() < prob_[col] ? static_cast<Index>(col) : alias_[col];
    }

    Index size() const { return static_cast<Index>(prob_.size()); }

private:
    std::vector<double> prob_;
    std::vector<Index> alias_;
};

// Forced points keep their weight; s draws from the rest with probability
// sigma1/S and weight w S / (s sigma1), one row per draw.
// Returns the input unchanged when there are not enough points to sample from.
inline Coreset sensitivity_sample(const PointSet& points, const SensitivityProfile& profile, std::int64_t s,
                                  std::uint64_t seed) {
    detail::require(s >= 1, "sensitivity_sample: s must be >= 1");
    if (profile.size() != points.size())
        throw InvalidArgument("sensitivity_sample: profile does not match the points");
    if (!(profile.total > 0.0)) throw InvalidInput("sensitivity_sample: degenerate profile (total <= 0)");
    if (points.size() <= s) return identity_coreset(points);
    const Vector w = points.weight_vector();
    const Renormalized r = renormalize_sensitivities(profile, w, s);
    if (!r.feasible) return identity_coreset(points);

    std::vector<Index> rows;
    std::vector<double> weights;
    for (Index i = 0; i < points.size(); ++i)
        if (r.forced[static_cast<std::size_t>(i)]) {
            rows.push_back(i);
            weights.push_back(w(i));
        }

    AliasTable table(r.sigma1);
    Rng rng(seed);
    for (std::int64_t t = 0; t < s; ++t) {
        const Index i = table.sample(rng);
        rows.push_back(i);
        // sigma1 <= S/s makes this >= w(i); the max only absorbs rounding.
        weights.push_back(std::max(w(i), w(i) * r.total / (static_cast<double>(s) * r.sigma1(i))));
    }

    Matrix out(static_cast<Index>(rows.size()), points.dim());
    Vector ow(static_cast<Index>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        out.row(static_cast<Index>(t)) = points.rows().row(rows[t]);
        ow(static_cast<Index>(t)) = weights[t];
    }
    return Coreset(std::move(out), std::move(ow), 0.0);
}

}  // namespace tinycore
