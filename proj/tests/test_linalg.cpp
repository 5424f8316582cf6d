#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace tinycore;
using namespace tinycore::testing;

namespace {

void expect_valid_factors(const Matrix& a, const SvdFactors& f) {
    const Index r = std::min(a.rows(), a.cols());
    ASSERT_EQ(f.sigma.size(), r);
    for (Index i = 1; i < r; ++i) EXPECT_GE(f.sigma(i - 1), f.sigma(i));
    EXPECT_GE(f.sigma.minCoeff(), 0.0);
    EXPECT_LE(max_orthogonality_error(f.u), kOrthTol);
    EXPECT_LE(max_orthogonality_error(f.v), kOrthTol);
    const Matrix rec = f.u * f.sigma.asDiagonal() * f.v.transpose();
    EXPECT_LE((rec - a).norm(), kReconTol * std::max(1.0, a.norm()));
}

}  // namespace

TEST(Svd, IdentityHasUnitSingularValues) {
    const SvdFactors f = svd(Matrix(Matrix::Identity(3, 3)));
    EXPECT_TRUE(f.sigma.isApprox(Vector::Ones(3), 1e-14));
}

TEST(Svd, DiagonalMatrix) {
    Matrix a(2, 2);
    a << 3, 0, 0, 2;
    const SvdFactors f = svd(a);
    EXPECT_NEAR(f.sigma(0), 3.0, 1e-14);
    EXPECT_NEAR(f.sigma(1), 2.0, 1e-14);
}

TEST(Svd, RandomFiveByFourReconstructsEntrywise) {
    Rng rng(5);
    const Matrix a = gaussian_matrix(5, 4, rng);
    const SvdFactors f = svd(a);
    const Matrix rec = f.u * f.sigma.asDiagonal() * f.v.transpose();
    EXPECT_LE((rec - a).cwiseAbs().maxCoeff(), 1e-10);
    expect_valid_factors(a, f);
}

TEST(Svd, MatchesReferenceOnManyShapes) {
    Rng rng(11);
    const std::vector<std::pair<Index, Index>> shapes{{1, 1}, {1, 7}, {7, 1}, {30, 5}, {5, 30}, {40, 40}, {200, 12}, {9, 60}};
    for (auto [n, d] : shapes) {
        const Matrix a = gaussian_matrix(n, d, rng);
        const SvdFactors f = svd(a);
        expect_valid_factors(a, f);
        const Vector ref = reference_singular_values(a);
        EXPECT_LE((f.sigma - ref).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, ref(0))) << n << "x" << d;
    }
}

TEST(Svd, RankDeficientInputCompletesBasis) {
    Rng rng(12);
    const Matrix a = gaussian_matrix(50, 3, rng) * gaussian_matrix(3, 10, rng);
    const SvdFactors f = svd(a);
    expect_valid_factors(a, f);
    for (Index i = 3; i < 10; ++i) EXPECT_LE(f.sigma(i), 1e-10 * f.sigma(0));
    const Matrix zero = Matrix::Zero(4, 3);
    expect_valid_factors(zero, svd(zero));
}

TEST(Svd, NonFiniteInputRejected) {
    Matrix a = Matrix::Ones(3, 3);
    a(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(svd(a), InvalidInput);
}

TEST(LowRank, DiagonalDropsTrailingValue) {
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << 3, 2, 1;
    Matrix expect = Matrix::Zero(3, 3);
    expect.diagonal() << 3, 2, 0;
    EXPECT_LE((low_rank_approx(svd(a), 2) - expect).norm(), 1e-12);
}

TEST(LowRank, RankOneRecoveredExactly) {
    Rng rng(3);
    const Matrix a = gaussian_matrix(6, 1, rng) * gaussian_matrix(1, 4, rng);
    EXPECT_LE((low_rank_approx(svd(a), 1) - a).norm(), 1e-12 * a.norm());
}

TEST(LowRank, ResidualEqualsTailEnergy) {
    Rng rng(4);
    const Matrix a = gaussian_matrix(6, 4, rng);
    const SvdFactors f = svd(a);
    const double residual = (a - low_rank_approx(f, 2)).squaredNorm();
    EXPECT_NEAR(residual, f.sigma(2) * f.sigma(2) + f.sigma(3) * f.sigma(3), 1e-9 * residual);
    EXPECT_THROW(low_rank_approx(f, 0), InvalidArgument);
    EXPECT_THROW(low_rank_approx(f, 5), InvalidArgument);
}

TEST(LowRank, EckartYoungMonotoneAndZeroAtRank) {
    Rng rng(6);
    const Matrix a = gaussian_matrix(20, 4, rng) * gaussian_matrix(4, 9, rng);
    const SvdFactors f = svd(a);
    double prev = std::numeric_limits<double>::infinity();
    for (Index m = 1; m <= 9; ++m) {
        const double r = (a - low_rank_approx(f, m)).squaredNorm();
        EXPECT_LE(r, prev + 1e-9);
        prev = r;
    }
    EXPECT_LE((a - low_rank_approx(f, 4)).squaredNorm(), 1e-18 * a.squaredNorm() + 1e-20);
}

TEST(Dist2, PointsOnSubspaceCostNothing) {
    Rng rng(7);
    const Subspace s = random_subspace(5, 2, rng);
    const Matrix pts = gaussian_matrix(10, 2, rng) * s.basis.transpose();
    EXPECT_NEAR(dist2(PointSet(pts), s), 0.0, 1e-20 + 1e-12 * pts.squaredNorm());
}

TEST(Dist2, UnitPointToOrigin) {
    Matrix p(1, 2);
    p << 1, 0;
    EXPECT_DOUBLE_EQ(dist2(PointSet(p), CenterSet(Matrix::Zero(1, 2))), 1.0);
}

TEST(Dist2, CentersMatchExplicitLoop) {
    Rng rng(8);
    const PointSet p(gaussian_matrix(10, 3, rng), (Vector(10) << 1, 2, 3, 1, 1, 2, 5, 1, 1, 0.5).finished());
    const CenterSet c(gaussian_matrix(2, 3, rng));
    double expect = 0.0;
    for (Index i = 0; i < 10; ++i) {
        const double a = (p.rows().row(i) - c.centers.row(0)).squaredNorm();
        const double b = (p.rows().row(i) - c.centers.row(1)).squaredNorm();
        expect += p.weight(i) * std::min(a, b);
    }
    EXPECT_NEAR(dist2(p, c), expect, 1e-12 * expect);
}

TEST(Dist2, DimensionMismatchRejected) {
    EXPECT_THROW(dist2(PointSet(Matrix::Ones(2, 3)), CenterSet(Matrix::Zero(1, 2))), InvalidArgument);
}

TEST(Dist2, SubspaceSetTakesNearestFlat) {
    Matrix p(1, 2);
    p << 3, 1;
    Matrix x(2, 1), y(2, 1);
    x << 1, 0;
    y << 0, 1;
    const SubspaceSet set{{Subspace(x), Subspace(y)}};
    EXPECT_DOUBLE_EQ(dist2(PointSet(p), set), 1.0);
}

TEST(Pythagoras, HoldsForRandomBases) {
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        const Matrix a = gaussian_matrix(15, 6, rng);
        const Matrix x = orthonormalize(gaussian_matrix(6, 1 + static_cast<Index>(t % 5), rng));
        const Matrix y = orthogonal_complement(x);
        EXPECT_LE(max_orthogonality_error(y), kOrthTol);
        EXPECT_LE((x.transpose() * y).cwiseAbs().maxCoeff(), 1e-12);
        const double lhs = a.squaredNorm();
        const double rhs = (a * x).squaredNorm() + (a * y).squaredNorm();
        EXPECT_NEAR(lhs, rhs, 1e-9 * lhs);
        EXPECT_NEAR(dist2(PointSet(a), Subspace(x)), (a * y).squaredNorm(), 1e-9 * lhs);
        EXPECT_LE((a * x * x.transpose()).squaredNorm(), lhs * (1 + 1e-12));
    }
}

TEST(ProjectionGap, BoundedByTailSingularValue) {
    Rng rng(10);
    for (int t = 0; t < 120; ++t) {
        const Index n = 8 + static_cast<Index>(rng.below(12));
        const Index d = 4 + static_cast<Index>(rng.below(8));
        const Matrix a = gaussian_matrix(n, d, rng);
        const int j = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - 1)));
        const Index m = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::min(n, d) - 1)));
        const Matrix x = orthonormalize(gaussian_matrix(d, j, rng));
        const SvdFactors f = svd(a);
        const double gap = (a * x).squaredNorm() - (low_rank_approx(f, m) * x).squaredNorm();
        const double s = f.sigma(m);
        EXPECT_GE(gap, -1e-9 * a.squaredNorm());
        EXPECT_LE(gap, j * s * s + 1e-9 * a.squaredNorm());
    }
}

TEST(WeightedFold, UnitWeightsUnchangedAndFourDoubles) {
    Rng rng(13);
    const Matrix a = gaussian_matrix(3, 2, rng);
    EXPECT_EQ(weighted_fold(a, Vector::Ones(3)), a);
    const Matrix f = weighted_fold(a, (Vector(3) << 1, 4, 1).finished());
    EXPECT_TRUE(f.row(1).isApprox(2 * a.row(1)));
    EXPECT_THROW(weighted_fold(a, (Vector(3) << 1, -1, 1).finished()), InvalidInput);
}

TEST(WeightedFold, FoldedSubspaceCostEqualsWeightedCost) {
    const PointSet p = random_weighted(gaussian_points(30, 6, 14), 15);
    Rng rng(16);
    const Subspace s = random_subspace(6, 2, rng);
    const Matrix y = orthogonal_complement(s.basis);
    double direct = 0.0;
    for (Index i = 0; i < p.size(); ++i) direct += p.weight(i) * point_dist2(p.rows().row(i).transpose(), s);
    EXPECT_NEAR((weighted_fold(p) * y).squaredNorm(), direct, 1e-9 * direct);
    EXPECT_NEAR(dist2(p, s), direct, 1e-9 * direct);
}

TEST(PointSetTest, Validation) {
    EXPECT_THROW(PointSet(Matrix(0, 3)), InvalidInput);
    EXPECT_THROW(PointSet(Matrix(3, 0)), InvalidInput);
    Matrix bad = Matrix::Ones(2, 2);
    bad(0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(PointSet{bad}, InvalidInput);
    EXPECT_THROW(PointSet(Matrix::Ones(2, 2), Vector::Ones(3)), InvalidInput);
    EXPECT_THROW(PointSet(Matrix::Ones(2, 2), (Vector(2) << 1, -0.5).finished()), InvalidInput);
}

TEST(PointSetTest, WeightedMean) {
    Matrix a(2, 1);
    a << 0, 4;
    EXPECT_DOUBLE_EQ(PointSet(a, (Vector(2) << 3, 1).finished()).mean()(0), 1.0);
    EXPECT_THROW(PointSet(a, Vector::Zero(2)).mean(), InvalidInput);
}

TEST(SubspaceTest, Validation) {
    EXPECT_THROW(Subspace(Matrix::Identity(3, 3)), InvalidArgument);
    Matrix x(3, 1);
    x << 1, 1, 0;
    EXPECT_THROW(Subspace{x}, InvalidArgument);
}

TEST(CeilTolerant, ForgivesRoundingNoise) {
    EXPECT_EQ(ceil_tolerant(3.0 / 0.1), 30);
    EXPECT_EQ(ceil_tolerant(2.5), 3);
    EXPECT_EQ(ceil_tolerant(30.01), 31);
}
