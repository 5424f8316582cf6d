#pragma once

// k-means coresets: the direct sensitivity-sampling pipeline and the smaller
// variant that first projects onto the top singular subspace.

#include <cstdint>

#include "tinycore/dimred.hpp"
#include "tinycore/sensitivity.hpp"

namespace tinycore {

struct KmeansCoresetReport {
    Coreset coreset;
    std::int64_t sample_size = 0;  // s requested from the sampler
    double total_sensitivity = 0.0;
    std::int64_t dim_bound = 0;
    Index working_dim = 0;  // dimension the sampler ran in
    bool exact = false;     // input returned unchanged
};

namespace detail {

inline void check_kmeans_args(const PointSet& points, Index k, double eps, double delta) {
    require(k >= 1, "kmeans coreset: k must be >= 1");
    require(k <= points.size(), "kmeans coreset: k must not exceed the number of points");
    require(eps > 0.0 && eps <= 1.0, "kmeans coreset: eps must lie in (0, 1]");
    require(delta > 0.0 && delta < 1.0, "kmeans coreset: delta must lie in (0, 1)");
}

}  // namespace detail

inline KmeansCoresetReport kmeans_coreset_report(const PointSet& points, Index k, double eps, double delta,
                                                 std::uint64_t seed, const SensitivityConstants& c = {}) {
    detail::check_kmeans_args(points, k, eps, delta);
    KmeansCoresetReport rep;
    rep.working_dim = points.dim();
    const BicriteriaSolution bic = bicriteria_kmeans(points, k, delta, mix_seed(seed, 1), c.beta);
    const SensitivityProfile prof = kmeans_sensitivities(points, bic, c);
    rep.total_sensitivity = prof.total;
    rep.dim_bound = kmeans_dim_bound(points.dim(), k, c.c_dim);
    rep.sample_size = vc_sample_size(prof.total, rep.dim_bound, eps, delta, c.c_vc);
    rep.coreset = sensitivity_sample(points, prof, rep.sample_size, mix_seed(seed, 2));
    rep.exact = rep.coreset.size() == points.size() && rep.sample_size >= points.size();
    return rep;
}

inline Coreset kmeans_coreset(const PointSet& points, Index k, double eps, double delta, std::uint64_t seed,
                              const SensitivityConstants& c = {}) {
    return kmeans_coreset_report(points, k, eps, delta, seed, c).coreset;
}

// Project to m = min{n, d, k + ceil(32k/eps^2) - 1} dimensions, build the
// direct coreset there at eps/8 and lift it back. When the formula already
// reaches d there is nothing to project and the offset stays zero.
inline KmeansCoresetReport small_kmeans_coreset_report(const PointSet& points, Index k, double eps, double delta,
                                                       std::uint64_t seed, const SensitivityConstants& c = {}) {
    detail::check_kmeans_args(points, k, eps, delta);
    const Index want = reduction_dimension_formula(ReductionMode::coreset_lift, static_cast<int>(k), eps);
    if (want >= points.dim()) return kmeans_coreset_report(points, k, eps / 8.0, delta, seed, c);

    const ReducedInstance red = reduce(points, static_cast<int>(k), eps, ReductionMode::coreset_lift);
    const PointSet low = red.reduced_set();
    detail::require(k <= low.size(), "small kmeans coreset: k must not exceed the number of points");
    KmeansCoresetReport rep = kmeans_coreset_report(low, k, eps / 8.0, delta, seed, c);
    rep.coreset = lift_coreset(rep.coreset, red);
    return rep;
}

inline Coreset small_kmeans_coreset(const PointSet& points, Index k, double eps, double delta, std::uint64_t seed,
                                    const SensitivityConstants& c = {}) {
    return small_kmeans_coreset_report(points, k, eps, delta, seed, c).coreset;
}

}  // namespace tinycore
