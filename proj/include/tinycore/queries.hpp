#pragma once

// Random query shapes used to probe the sandwich bound of a summary.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tinycore/clustering.hpp"

namespace tinycore {

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

inline Subspace random_subspace(Index d, int j, Rng& rng) {
    return Subspace(orthonormalize(gaussian_matrix(d, j, rng)));
}

// Offset drawn around `center` with per-coordinate spread `scale`.
inline Subspace random_affine_subspace(Index d, int j, Rng& rng, const Vector& center, double scale) {
    Matrix x = orthonormalize(gaussian_matrix(d, j, rng));
    Vector p = center + scale * gaussian_matrix(d, 1, rng).col(0);
    return Subspace(std::move(x), std::move(p));
}

// k centers near random data points, jittered by `scale`.
inline CenterSet random_centers_near(const PointSet& points, Index k, Rng& rng, double scale) {
    Matrix c(k, points.dim());
    for (Index i = 0; i < k; ++i) {
        const Index src = static_cast<Index>(rng.below(static_cast<std::uint64_t>(points.size())));
        c.row(i) = points.rows().row(src) + scale * gaussian_matrix(1, points.dim(), rng);
    }
    return CenterSet(std::move(c));
}

// A shape living inside a random j-dimensional linear subspace X: either k
// point centers in X or an affine r-flat (1 <= r <= j) in X.
inline QueryShape random_shape_in_subspace(Index d, int j, Index k, Rng& rng, double scale) {
    const Matrix x = orthonormalize(gaussian_matrix(d, j, rng));
    if (rng.below(2) == 0 || j >= d) {
        Matrix c = gaussian_matrix(k, j, rng) * scale;
        return CenterSet(c * x.transpose());
    }
    const int r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(j)));
    const Matrix q = orthonormalize(gaussian_matrix(j, r, rng));
    const Vector o = x * (scale * gaussian_matrix(j, 1, rng).col(0));
    return Subspace(orthonormalize(x * q), o);
}

// Candidate center sets for "for all C" checks: good solutions (Lloyd from
// several seeds), random jittered data points, and far-away sets that stress
// the total weight.
inline std::vector<CenterSet> center_grid(const PointSet& points, Index k, int count, std::uint64_t seed) {
    detail::require(count >= 1, "center_grid: count must be >= 1");
    Rng rng(seed);
    std::vector<CenterSet> grid;
    const Vector lo = points.rows().colwise().minCoeff().transpose();
    const Vector hi = points.rows().colwise().maxCoeff().transpose();
    const double spread = std::max((hi - lo).norm(), 1e-12);
    const int good = std::max(1, count / 10);
    const int far = std::max(1, count / 10);
    for (int g = 0; g < good && static_cast<int>(grid.size()) < count; ++g)
        grid.push_back(lloyd_solve(points, std::min(k, points.size()), mix_seed(seed, static_cast<std::uint64_t>(g)), 30));
    for (int f = 0; f < far && static_cast<int>(grid.size()) < count; ++f) {
        Matrix c = gaussian_matrix(k, points.dim(), rng);
        for (Index i = 0; i < k; ++i) c.row(i) = c.row(i).normalized() * (10.0 + 90.0 * rng.uniform()) * spread;
        c.rowwise() += (0.5 * (lo + hi)).transpose();
        grid.emplace_back(std::move(c));
    }
    while (static_cast<int>(grid.size()) < count) {
        const double scale = spread * (rng.uniform() < 0.5 ? 0.05 : 0.5);
        grid.push_back(random_centers_near(points, k, rng, scale));
    }
    return grid;
}

}  // namespace tinycore
