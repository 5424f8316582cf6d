#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace tinycore;
using namespace tinycore::testing;

TEST(ReductionDimension, Formulas) {
    EXPECT_EQ(reduction_dimension_formula(ReductionMode::kmeans, 3, 0.6), 602);
    EXPECT_EQ(reduction_dimension_formula(ReductionMode::general, 2, 1.0), 15);
    EXPECT_EQ(reduction_dimension_formula(ReductionMode::coreset_lift, 2, 0.8), 101);
    EXPECT_EQ(reduction_dimension(ReductionMode::kmeans, 3, 0.6, 1000, 40), 40);
    EXPECT_EQ(reduction_dimension(ReductionMode::general, 2, 1.0, 80, 20), 15);
    EXPECT_EQ(reduction_dimension(ReductionMode::coreset_lift, 2, 0.8, 100, 15), 15);
    EXPECT_EQ(reduction_dimension(ReductionMode::coreset_lift, 2, 0.8, 60, 300), 60);
}

TEST(Reduce, RejectsEpsOutsideUnitInterval) {
    const PointSet a = gaussian_points(10, 4, 1);
    EXPECT_THROW(reduce(a, 1, 0.0, ReductionMode::general), InvalidArgument);
    EXPECT_THROW(reduce(a, 1, 1.5, ReductionMode::general), InvalidArgument);
    EXPECT_NO_THROW(reduce(a, 1, 1.0, ReductionMode::general));
}

TEST(Reduce, InstanceInvariants) {
    const PointSet a = gaussian_points(80, 20, 2);
    const ReducedInstance r = reduce(a, 2, 1.0, ReductionMode::general);
    EXPECT_EQ(r.m, 15);
    EXPECT_EQ(r.reduced_points.rows(), 80);
    EXPECT_EQ(r.reduced_points.cols(), 15);
    EXPECT_LE(max_orthogonality_error(r.basis), kOrthTol);
    EXPECT_GE(r.delta, 0.0);
    EXPECT_NEAR(r.delta, (a.rows() - r.ambient()).squaredNorm(), 1e-9 * r.delta);
}

TEST(Reduce, LowRankIsLossless) {
    Rng rng(3);
    const PointSet a(gaussian_matrix(50, 3, rng) * gaussian_matrix(3, 12, rng));
    const ReducedInstance r = reduce(a, 1, 1.0, ReductionMode::general);  // m = 7 >= rank
    EXPECT_LE(r.delta, 1e-18 * a.rows().squaredNorm() + 1e-20);
    for (int t = 0; t < 50; ++t) {
        const QueryShape c = random_shape_in_subspace(12, 3, 2, rng, 2.0);
        EXPECT_NEAR(dist2(PointSet(r.ambient()), c) + r.delta, dist2(a, c), 1e-9 * dist2(a, c));
    }
}

TEST(Reduce, GeneralModeBoundOverRandomShapes) {
    const PointSet a = gaussian_points(80, 20, 4);
    const ReducedInstance r = reduce(a, 2, 1.0, ReductionMode::general);
    const PointSet am(r.ambient());
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        const QueryShape c = random_shape_in_subspace(20, 2, 3, rng, 3.0);
        const double truth = dist2(a, c);
        EXPECT_LE(std::abs(dist2(am, c) + r.delta - truth), 1.0 * truth);
    }
}

TEST(Reduce, BoundHoldsForRandomDraws) {
    Rng rng(6);
    for (int t = 0; t < 60; ++t) {
        const Index n = 30 + static_cast<Index>(rng.below(40));
        const Index d = 20 + static_cast<Index>(rng.below(20));
        const double eps = 0.7 + 0.3 * rng.uniform();
        const PointSet a = anisotropic_points(n, d, rng.next(), 0.9);
        const ReducedInstance r = reduce(a, 1, eps, ReductionMode::general);
        const PointSet am(r.ambient());
        for (int q = 0; q < 10; ++q) {
            const QueryShape c = random_shape_in_subspace(d, 1, 2, rng, 2.0);
            const double truth = dist2(a, c);
            EXPECT_LE(std::abs(dist2(am, c) + r.delta - truth), eps * truth + 1e-9);
        }
    }
}

TEST(Reduce, ProjectionResidualBound) {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        const int j = 1 + static_cast<int>(rng.below(3));
        const double eps = 0.3 + 0.7 * rng.uniform();
        const Index m = coreset_size_linear(j, eps);
        const Matrix a = anisotropic_points(60, 25, rng.next(), 0.85).rows();
        if (m >= 25) continue;
        const Matrix x = orthonormalize(gaussian_matrix(25, j, rng));
        const Matrix y = orthogonal_complement(x);
        const Matrix am = low_rank_approx(svd(a), m);
        const double lhs = ((a - am) * x * x.transpose()).squaredNorm();
        EXPECT_LE(lhs, eps * (a * y).squaredNorm() * (1 + 1e-9));
    }
}

TEST(WeakTriangle, EqualSetsGiveZeroGap) {
    const PointSet a = gaussian_points(20, 4, 8);
    Rng rng(9);
    const QueryShape c = random_centers_near(a, 2, rng, 1.0);
    EXPECT_NEAR(weak_triangle_gap(a, a, c, 0.3), 0.3 * dist2(a, c), 1e-12 * dist2(a, c));
}

TEST(WeakTriangle, TranslatedSetFarShape) {
    const PointSet a = gaussian_points(20, 4, 10);
    const PointSet b(a.rows().rowwise() + Eigen::RowVectorXd::Constant(4, 0.5));
    const QueryShape c = CenterSet(Matrix::Constant(1, 4, 100.0));
    const double gap = std::abs(dist2(a, c) - dist2(b, c));
    EXPECT_GT(gap, 0.0);
    EXPECT_LE(gap, weak_triangle_gap(a, b, c, 0.5));
}

TEST(WeakTriangle, RandomDrawsNeverViolate) {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        const Index d = 3 + static_cast<Index>(rng.below(5));
        const Matrix ar = gaussian_matrix(15, d, rng);
        const Matrix br = ar + (0.05 + rng.uniform()) * gaussian_matrix(15, d, rng);
        const PointSet a(ar), b(br);
        const double eps = 0.05 + rng.uniform();
        const QueryShape c = rng.below(2) == 0 ? QueryShape(random_centers_near(a, 2, rng, 2.0))
                                               : QueryShape(random_affine_subspace(d, 1, rng, a.mean(), 1.0));
        EXPECT_LE(std::abs(dist2(a, c) - dist2(b, c)), weak_triangle_gap(a, b, c, eps) * (1 + 1e-12));
    }
    EXPECT_THROW(weak_triangle_gap(PointSet(Matrix::Ones(3, 2)), PointSet(Matrix::Ones(4, 2)), CenterSet(Matrix::Zero(1, 2)), 0.5),
                 InvalidArgument);
}

TEST(LiftCoreset, IdentityInnerCoresetGivesReducedTriple) {
    const PointSet a = gaussian_points(30, 10, 12);
    const ReducedInstance r = reduce_to_dimension(a, 4);
    const Coreset lifted = lift_coreset(identity_coreset(r.reduced_set()), r);
    EXPECT_LE((lifted.points - r.ambient()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(lifted.weights, Vector::Ones(30));
    EXPECT_DOUBLE_EQ(lifted.delta, r.delta);
}

TEST(LiftCoreset, FullRankIsPureEmbedding) {
    const PointSet a = gaussian_points(5, 8, 13);
    const ReducedInstance r = reduce_to_dimension(a, 5);
    const Coreset lifted = lift_coreset(identity_coreset(r.reduced_set()), r);
    EXPECT_LE(lifted.delta, 1e-18 * a.rows().squaredNorm() + 1e-20);
    EXPECT_LE((lifted.points - a.rows()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LiftCoreset, DimensionMismatchRejected) {
    const PointSet a = gaussian_points(20, 6, 14);
    const ReducedInstance r = reduce_to_dimension(a, 3);
    EXPECT_THROW(lift_coreset(identity_coreset(a), r), InvalidArgument);
}

TEST(LiftCoreset, KmeansPipelineSandwich) {
    const PointSet a = blobs(100, 15, 2, 15, 4.0);
    const double eps = 0.8;
    const ReducedInstance r = reduce(a, 2, eps, ReductionMode::coreset_lift);
    ASSERT_EQ(r.m, 15);
    const Coreset low = kmeans_coreset(r.reduced_set(), 2, eps / 8.0, 0.1, 16, sampling_constants());
    const Coreset lifted = lift_coreset(low, r);
    EXPECT_EQ(lifted.dim(), 15);
    const SandwichResult s = sandwich(a, lifted, center_grid(a, 2, 200, 17));
    EXPECT_LE(s.max_rel_error, eps);
}

TEST(ApproxSolution, SeparatedClustersMatchBruteForce) {
    Rng rng(18);
    Matrix rows(12, 10);
    const Matrix centers = 20.0 * gaussian_matrix(3, 10, rng);
    for (Index i = 0; i < 12; ++i) rows.row(i) = centers.row(i % 3) + 0.5 * gaussian_matrix(1, 10, rng);
    const PointSet a(rows);
    const QueryShape c = approx_solution(a, KMeansProblem{3}, 0.5, default_solver(), 19);
    EXPECT_LE(dist2(a, c), 1.01 * exhaustive_kmeans_cost(a, 3));
}

TEST(ApproxSolution, TrivialCases) {
    Matrix p(1, 3);
    p << 1, 2, 3;
    const QueryShape one = approx_solution(PointSet(p), KMeansProblem{1}, 0.5, default_solver());
    EXPECT_NEAR(dist2(PointSet(p), one), 0.0, 1e-20);
    const PointSet a = gaussian_points(6, 4, 20);
    EXPECT_NEAR(dist2(a, approx_solution(a, KMeansProblem{6}, 0.5, default_solver())), 0.0, 1e-18);
}

TEST(ApproxSolution, ProjectedKmeansWithinApproximationFactor) {
    const PointSet a = blobs(60, 300, 2, 21, 3.0);
    const double eps = 0.5;
    ASSERT_EQ(approx_dimension(KMeansProblem{2}, eps, 60, 300), 60);
    EXPECT_EQ(approx_dimension(KMeansProblem{2}, eps, 1000, 300), 2 + 192);
    const QueryShape c = approx_solution(a, KMeansProblem{2}, eps, default_solver(), 22);
    const double ref = dist2(a, lloyd_best_of(a, 2, 23, 10));
    EXPECT_LE(dist2(a, c), (1 + eps) / (1 - eps) * ref);
}

TEST(ApproxSolution, AffineFlatProjected) {
    const PointSet a = anisotropic_points(50, 200, 24, 0.97);
    const double eps = 0.5;
    const QueryShape c = approx_solution(a, AffineProblem{1, 1}, eps, default_solver(), 25);
    ASSERT_EQ(shape_dim(c), 200);
    const double opt = dist2(a, fit_flat(a, 1));
    EXPECT_LE(dist2(a, c), (1 + eps) / (1 - eps) * opt);
}

TEST(ApproxSolution, ReducedExactSolverWithinOnePlusEps) {
    // Exact solver on A^(m) with m from the k-means formula, checked against brute force on A.
    Rng rng(26);
    for (int t = 0; t < 10; ++t) {
        const PointSet a = blobs(10, 6, 2, rng.next(), 3.0);
        const ReducedInstance r = reduce(a, 2, 1.0, ReductionMode::kmeans);
        const CenterSet low = brute_force_kmeans(r.reduced_set(), 2);
        const CenterSet lifted(low.centers * r.basis.transpose());
        EXPECT_LE(dist2(a, lifted), 2.0 * exhaustive_kmeans_cost(a, 2) * (1 + 1e-9));
    }
}

TEST(ApproxSolution, RejectsBadArguments) {
    const PointSet a = gaussian_points(10, 3, 27);
    EXPECT_THROW(approx_solution(a, KMeansProblem{2}, 0.6, default_solver()), InvalidArgument);
    EXPECT_THROW(approx_solution(a, KMeansProblem{11}, 0.5, default_solver()), InvalidArgument);
    EXPECT_THROW(approx_solution(a, AffineProblem{3, 1}, 0.5, default_solver()), InvalidArgument);
}
