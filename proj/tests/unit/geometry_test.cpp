#include "frdrl/geometry.hpp"
#include "test_data.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace frdrl;
using frdrl::testing::uniform_matrix;

TEST(KnnSimilarity, IdenticalPair) {
    const Similarity s = knn_similarity(Matrix::Ones(2, 3), 1, 1.0);
    EXPECT_EQ(s.S(0, 1), 1.0);
    EXPECT_EQ(s.S(1, 0), 1.0);
    EXPECT_EQ(s.S(0, 0), 0.0);
}

TEST(KnnSimilarity, CollinearHandEnumeration) {
    Matrix P(3, 1);
    P << 0, 1, 10;
    const Matrix S = knn_similarity(P, 1, 1.0).S;
    EXPECT_DOUBLE_EQ(S(0, 1), std::exp(-0.5));
    EXPECT_DOUBLE_EQ(S(1, 2), std::exp(-40.5) / 2.0);
    EXPECT_EQ(S(0, 2), 0.0);
}

TEST(KnnSimilarity, AutoBandwidthIsMedianKnnDistance) {
    Matrix P(4, 1);
    P << 0, 1, 3, 7;
    // 1-NN distances: 1, 1, 2, 4 -> median 1.5
    EXPECT_DOUBLE_EQ(knn_similarity(P, 1).bandwidth, 1.5);
    EXPECT_EQ(knn_similarity(Matrix::Zero(4, 2), 2).bandwidth, 1.0);
}

TEST(KnnSimilarity, RandomOutputInvariants) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix P = uniform_matrix(rng, 30, 4);
        const Matrix S = knn_similarity(P, 5).S;
        EXPECT_TRUE((S.array() == S.transpose().array()).all());
        EXPECT_GE(S.minCoeff(), 0.0);
        EXPECT_EQ(S.diagonal().cwiseAbs().maxCoeff(), 0.0);
        for (int i = 0; i < 30; ++i) EXPECT_GE((S.row(i).array() > 0).count(), 5);
    }
}

TEST(KnnSimilarity, RejectsBadArguments) {
    EXPECT_THROW(knn_similarity(Matrix::Zero(3, 1), 3), std::invalid_argument);
    EXPECT_THROW(knn_similarity(Matrix::Zero(3, 1), 0), std::invalid_argument);
    EXPECT_THROW(knn_similarity(Matrix::Zero(3, 1), 1, -1.0), std::invalid_argument);
}

TEST(Laplacian, Definitions) {
    EXPECT_TRUE(laplacian(Matrix::Zero(3, 3)).isZero());
    Matrix S(2, 2);
    S << 0, 1, 1, 0;
    Matrix expected(2, 2);
    expected << 1, -1, -1, 1;
    EXPECT_TRUE(laplacian(S).isApprox(expected));
    Matrix bad = S;
    bad(0, 1) = 0.5;
    EXPECT_THROW(laplacian(bad), std::invalid_argument);
}

TEST(Laplacian, RowSumsZeroAndPsd) {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix S = knn_similarity(uniform_matrix(rng, 20, 3), 4).S;
        const Matrix Lg = laplacian(S);
        EXPECT_LT(Lg.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
        for (int v = 0; v < 100; ++v) {
            const Vector x = uniform_matrix(rng, 20, 1);
            EXPECT_GE(x.dot(Lg * x), -1e-10);
        }
    }
}

TEST(SecondOrderOperator, IdentityForEmptyGraph) {
    EXPECT_TRUE(second_order_operator(Matrix::Zero(4, 4)).isIdentity());
}

TEST(SecondOrderOperator, QuadraticFormMatchesLoops) {
    Rng rng(3);
    const Matrix S = knn_similarity(uniform_matrix(rng, 4, 2), 2).S;
    const Matrix Lambda = second_order_operator(S);
    const Matrix Z = uniform_matrix(rng, 4, 2);
    double oracle = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int l = 0; l < 2; ++l) {
            double r = Z(i, l);
            for (int j = 0; j < 4; ++j) r -= S(i, j) * Z(j, l);
            oracle += r * r;
        }
    }
    EXPECT_NEAR((Z.transpose() * Lambda.transpose() * Lambda * Z).trace(), oracle, 1e-12 * oracle);
}

TEST(CombinedOperator, EmptyGraphGivesGram) {
    Rng rng(4);
    const Matrix Xg = uniform_matrix(rng, 6, 3);
    const Matrix M = combined_operator(Xg, Matrix::Zero(6, 6), Matrix::Identity(6, 6));
    EXPECT_TRUE(M.isApprox(Xg.transpose() * Xg, 1e-14));
}

TEST(CombinedOperator, QuadraticFormIdentityAndPsd) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix Xg = uniform_matrix(rng, 5, 3);
        const Matrix S = knn_similarity(Xg, 2).S;
        const Matrix Lg = laplacian(S);
        const Matrix Lambda = second_order_operator(S);
        const Matrix M = combined_operator(Xg, Lg, Lambda);
        EXPECT_TRUE((M.array() == M.transpose().array()).all());
        const Vector P = uniform_matrix(rng, 3, 1);
        const Vector Z = Xg * P;
        double first = 0.0, second = 0.0;
        for (int i = 0; i < 5; ++i) {
            double r = Z(i);
            for (int j = 0; j < 5; ++j) {
                first += 0.5 * S(i, j) * (Z(i) - Z(j)) * (Z(i) - Z(j));
                r -= S(i, j) * Z(j);
            }
            second += r * r;
        }
        const double lhs = P.dot(M * P);
        EXPECT_NEAR(lhs, first + second, 1e-10 * std::abs(first + second));
        for (int v = 0; v < 100; ++v) {
            const Vector x = uniform_matrix(rng, 3, 1);
            EXPECT_GE(x.dot(M * x), -1e-10);
        }
    }
}

TEST(LipschitzEstimate, KnownSpectra) {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 3;
    D(1, 1) = 1;
    EXPECT_NEAR(lipschitz_estimate(D), 3 * 1.01, 3e-5);
    EXPECT_NEAR(lipschitz_estimate(Matrix::Identity(5, 5)), 1.01, 1e-5);
    EXPECT_EQ(lipschitz_estimate(Matrix::Zero(4, 4)), 1.0);
}

TEST(LipschitzEstimate, BoundsDenseEigensolver) {
    Rng rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix A = uniform_matrix(rng, 8, 6);
        const Matrix M = A.transpose() * A;
        const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues().maxCoeff();
        const double Lc = lipschitz_estimate(M);
        EXPECT_GE(Lc, lmax);
        EXPECT_LE(Lc, 1.02 * lmax);
    }
}

TEST(BuildGeometry, ConsistentOperators) {
    Rng rng(7);
    const Matrix X = uniform_matrix(rng, 20, 2);
    const Matrix Xg = uniform_matrix(rng, 20, 6);
    const GeometryOperators g = build_geometry(X, Xg, GraphOptions{3, std::nullopt});
    EXPECT_TRUE(g.S.isApprox(knn_similarity(X, 3).S));
    EXPECT_TRUE(g.M.isApprox(combined_operator(Xg, g.Lg, g.Lambda)));
    EXPECT_EQ(g.Lc, lipschitz_estimate(g.M));
    EXPECT_THROW(build_geometry(X, Xg.topRows(10), GraphOptions{}), std::invalid_argument);
}
