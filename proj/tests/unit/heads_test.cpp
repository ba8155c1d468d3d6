#include "frdrl/heads.hpp"
#include "frdrl/metrics.hpp"
#include "test_data.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace frdrl;
using frdrl::testing::uniform_matrix;

TEST(Softmax, Examples) {
    Matrix Z(3, 3);
    Z << 0, 0, 0, 1000, 0, 0, 1, 2, 3;
    const Matrix s = softmax_rows(Z.leftCols(3));
    EXPECT_NEAR(s(0, 0), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(s(1, 0), 1.0);
    EXPECT_TRUE(s.allFinite());
    EXPECT_NEAR(s(2, 0), 0.09003, 5e-6);
    EXPECT_NEAR(s(2, 1), 0.24473, 5e-6);
    EXPECT_NEAR(s(2, 2), 0.66524, 5e-6);
    Matrix two(1, 2);
    two << 0, 0;
    EXPECT_EQ(softmax_rows(two)(0, 1), 0.5);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(s.row(i).sum(), 1.0, 1e-15);
}

TEST(ClassificationLoss, HandValues) {
    Matrix Z(1, 2), Y(1, 2);
    Z << 0, 0;
    Y << 1, 0;
    EXPECT_DOUBLE_EQ(classification_loss(Z, Y, Matrix::Zero(3, 2), 0.0), 0.5);
    Matrix P(2, 2);
    P << 1, 2, 3, 4;
    EXPECT_DOUBLE_EQ(classification_loss(Matrix(0, 2), Matrix(0, 2), P, 1.0), 30.0);
}

TEST(ClassificationLoss, MatchesLoopOracleAndBounds) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix Z = uniform_matrix(rng, 4, 3, -3, 3);
        const Matrix Y = one_hot(frdrl::testing::random_labels(rng, 4, 3), 3);
        const Matrix P = uniform_matrix(rng, 5, 3);
        double oracle = 0.0;
        for (int i = 0; i < 4; ++i) {
            double denom = 0.0;
            for (int c = 0; c < 3; ++c) denom += std::exp(Z(i, c));
            for (int c = 0; c < 3; ++c) {
                const double r = std::exp(Z(i, c)) / denom - Y(i, c);
                oracle += r * r;
            }
        }
        const double fit = classification_loss(Z, Y, P, 0.0);
        EXPECT_NEAR(fit, oracle, 1e-12 * oracle);
        EXPECT_GE(fit, 0.0);
        EXPECT_LE(fit, 2.0 * 4);
        double ridge = 0.0;
        for (Eigen::Index i = 0; i < P.size(); ++i) ridge += P.data()[i] * P.data()[i];
        EXPECT_NEAR(classification_loss(Z, Y, P, 0.01), oracle + 0.01 * ridge, 1e-12 * oracle);
    }
}

TEST(ClassificationGrad, HandValue) {
    Matrix Z(1, 2), Y(1, 2);
    Z << 0, 0;
    Y << 1, 0;
    const Matrix d = classification_grad(Z, Y);
    // s = [1/2, 1/2], g = 2(s - y) = [-1, 1], <g, s> = 0, so dZ = s * g.
    EXPECT_DOUBLE_EQ(d(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(d(0, 1), 0.5);
}

TEST(ClassificationGrad, VanishesAtTarget) {
    const Matrix Z = Matrix::Constant(3, 4, 0.7);
    const Matrix Y = Matrix::Constant(3, 4, 0.25);
    EXPECT_LT(classification_grad(Z, Y).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(ClassificationGrad, MatchesFiniteDifferences) {
    Rng rng(2);
    const Matrix Z = uniform_matrix(rng, 3, 4, -2, 2);
    const Matrix Y = one_hot({0, 3, 1}, 4);
    const Matrix d = classification_grad(Z, Y);
    const Matrix none = Matrix::Zero(1, 1);
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
        for (int c = 0; c < 4; ++c) {
            Matrix p = Z, m = Z;
            p(i, c) += h;
            m(i, c) -= h;
            const double fd = (classification_loss(p, Y, none, 0) - classification_loss(m, Y, none, 0)) / (2 * h);
            EXPECT_LT(std::abs(d(i, c) - fd), 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(ClassificationStep, PipelineGradientMatchesFiniteDifferences) {
    const Dataset data = minmax_normalize(frdrl::testing::gaussian_blobs(3, 2, 2, 3.0, 3));
    TrainConfig cfg;
    cfg.rules = 2;
    cfg.blocks = 2;
    cfg.knn = 2;
    const Preparation prep = prepare(data.X, cfg);
    UnrolledStack s = init_stack(prep.geometry.M, prep.geometry.Lc, 0.02, 2, 2, 7);
    Rng rng(4);
    for (Matrix& G : s.layers) G += 0.2 * uniform_matrix(rng, G.rows(), G.cols());
    const Matrix Y = one_hot(data.y, 2);
    const StepResult r = classification_step(s, prep.Xg, Y, 0.01);
    const double h = 1e-5;
    auto loss = [&](const UnrolledStack& x) { return classification_step(x, prep.Xg, Y, 0.01).loss; };
    for (std::size_t k = 0; k < 2; ++k) {
        for (Eigen::Index i = 0; i < s.layers[k].rows(); ++i) {
            for (Eigen::Index j = 0; j < s.layers[k].cols(); ++j) {
                UnrolledStack p = s, m = s;
                p.layers[k](i, j) += h;
                m.layers[k](i, j) -= h;
                const double fd = (loss(p) - loss(m)) / (2 * h);
                const double a = r.grads.layers[k](i, j);
                if (std::abs(a) > 1e-6) EXPECT_LT(std::abs(a - fd) / std::abs(a), 1e-4) << k << " " << i << " " << j;
            }
        }
    }
    UnrolledStack p = s, m = s;
    p.thresholds[0] += h;
    m.thresholds[0] -= h;
    const double fd = (loss(p) - loss(m)) / (2 * h);
    if (std::abs(r.grads.thresholds[0]) > 1e-6) EXPECT_LT(std::abs(r.grads.thresholds[0] - fd) / std::abs(fd), 1e-4);
}

TEST(ClassificationStep, EpochZeroLossIsPermutationInvariant) {
    Rng rng(5);
    const Matrix X = uniform_matrix(rng, 12, 2, 0, 1);
    const FuzzyAntecedent a(uniform_matrix(rng, 2, 2, 0, 1), Matrix::Constant(2, 2, 0.1));
    const Labels y = {0, 1, 0, 1, 0, 1, 1, 0, 0, 1, 1, 0};
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Matrix Xp(12, 2);
    Labels yp(12);
    for (int i = 0; i < 12; ++i) {
        Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
        yp[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    auto epoch0 = [&](const Matrix& pts, const Labels& labels) {
        const Matrix Xg = fuzzy_map(pts, a);
        const GeometryOperators g = build_geometry(Xg, Xg, GraphOptions{3, std::nullopt});
        return classification_step(init_stack(g.M, g.Lc, 1e-4, 3, 2, 9), Xg, one_hot(labels, 2), 0.01).loss;
    };
    const double l0 = epoch0(X, y);
    EXPECT_NEAR(epoch0(Xp, yp), l0, 1e-9 * l0);
}

TEST(Predict, ArgmaxTieRule) {
    Matrix Z(3, 2);
    Z << 0.9, 0.1, 0.5, 0.5, 0.2, 0.3;
    EXPECT_EQ(argmax_rows(Z), (Labels{0, 0, 1}));
}

TEST(TrainClassifier, SeparableBlobsFitExactly) {
    const Dataset data = minmax_normalize(frdrl::testing::gaussian_blobs(20, 2, 2, 8.0, 6));
    TrainConfig cfg;
    cfg.rules = 2;
    cfg.blocks = 5;
    cfg.epochs = 200;
    cfg.lr = 1e-3;
    const ClassifierFit fit = train_classifier(data, cfg);
    EXPECT_EQ(fit.loss.size(), 200u);
    EXPECT_LT(fit.loss.back(), fit.loss.front());
    EXPECT_EQ(predict(fit.model, data.X), data.y);
    EXPECT_EQ(fit.model.config.outputs, 2);
    EXPECT_TRUE((fit.model.consequent.array() == forward(fit.model.stack).output().array()).all());
}

TEST(TrainClassifier, ZeroEpochsIsIstaAtInit) {
    const Dataset data = minmax_normalize(frdrl::testing::gaussian_blobs(10, 3, 3, 5.0, 7));
    TrainConfig cfg;
    cfg.rules = 3;
    cfg.blocks = 4;
    cfg.epochs = 0;
    const ClassifierFit fit = train_classifier(data, cfg);
    const Preparation prep = prepare(data.X, cfg);
    const Matrix ista =
        classical_ista(prep.geometry.M, prep.geometry.Lc, cfg.alpha, fit.model.stack.initial, cfg.blocks);
    EXPECT_TRUE((fit.model.consequent.array() == ista.array()).all());
}

TEST(TrainClassifier, WineLossFiniteWithDefaults) {
    const Dataset wine = minmax_normalize(load_csv(frdrl::testing::data_path("wine.csv")));
    const FoldPlan plan = stratified_kfold(wine, 5, 42);
    const ClassifierFit fit = train_classifier(wine.subset(plan.folds[0].train), TrainConfig{});
    ASSERT_EQ(fit.loss.size(), 1000u);
    for (double l : fit.loss) ASSERT_TRUE(std::isfinite(l));
    const Dataset test = wine.subset(plan.folds[0].test);
    EXPECT_GE(accuracy(predict(fit.model, test.X), test.y), 0.85);
}

TEST(TrainClassifier, DeterministicTrajectory) {
    const Dataset data = minmax_normalize(frdrl::testing::gaussian_blobs(10, 2, 3, 4.0, 8));
    TrainConfig cfg;
    cfg.rules = 3;
    cfg.epochs = 30;
    EXPECT_EQ(train_classifier(data, cfg).loss, train_classifier(data, cfg).loss);
}

TEST(Prepare, RejectsOversizedNeighborhoodsAndRuleCounts) {
    const Dataset data = frdrl::testing::gaussian_blobs(2, 2, 2, 4.0, 9);
    TrainConfig cfg;
    cfg.rules = 2;
    cfg.knn = 4;
    EXPECT_THROW(prepare(data.X, cfg), ConfigError);
    cfg.knn = 2;
    cfg.rules = 5;
    EXPECT_THROW(prepare(data.X, cfg), ConfigError);
}

TEST(UpdateCenters, Examples) {
    Rng rng(10);
    const Matrix Z = uniform_matrix(rng, 4, 3);
    const Matrix V = update_centers(Z, {0, 1, 2, 3}, 4);
    EXPECT_TRUE((V.array() == Z.transpose().array()).all());

    Matrix two(2, 2);
    two << 0, 0, 2, 0;
    const Matrix c = update_centers(two, {0, 0}, 1);
    EXPECT_EQ(c(0, 0), 1.0);
    EXPECT_EQ(c(1, 0), 0.0);
}

TEST(UpdateCenters, MatchesMeanOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix Z = uniform_matrix(rng, 6, 2);
        Labels a = frdrl::testing::random_labels(rng, 6, 3);
        a[0] = 0, a[1] = 1, a[2] = 2;
        const Matrix V = update_centers(Z, a, 3);
        for (int c = 0; c < 3; ++c) {
            double sx = 0, sy = 0, n = 0;
            for (int i = 0; i < 6; ++i) {
                if (a[static_cast<std::size_t>(i)] != c) continue;
                sx += Z(i, 0), sy += Z(i, 1), n += 1;
            }
            EXPECT_NEAR(V(0, c), sx / n, 1e-12 * std::max(1.0, std::abs(sx / n)));
            EXPECT_NEAR(V(1, c), sy / n, 1e-12 * std::max(1.0, std::abs(sy / n)));
        }
    }
}

TEST(UpdateCenters, EmptyClusterReseededAtFarthestRow) {
    Matrix Z(4, 1);
    Z << 0, 1, 2, 10;
    const Matrix V = update_centers(Z, {0, 0, 0, 0}, 2);
    EXPECT_DOUBLE_EQ(V(0, 0), 3.25);
    EXPECT_EQ(V(0, 1), 10.0);
    EXPECT_THROW(update_centers(Z, {0, 0, 0, 2}, 2), std::invalid_argument);
}

TEST(UpdatePartition, NearestAndTies) {
    Matrix V(2, 2);
    V << 0, 10, 0, 10;
    Matrix Z(2, 2);
    Z << 1, 1, 5, 5;
    EXPECT_EQ(update_partition(Z, V), (Labels{0, 0}));
}

TEST(UpdatePartition, MatchesExhaustiveLoop) {
    Rng rng(12);
    const Matrix Z = uniform_matrix(rng, 30, 3);
    const Matrix V = uniform_matrix(rng, 3, 4);
    const Labels U = update_partition(Z, V);
    for (int i = 0; i < 30; ++i) {
        for (int c = 0; c < 4; ++c) {
            EXPECT_LE((Z.row(i).transpose() - V.col(U[static_cast<std::size_t>(i)])).squaredNorm(),
                      (Z.row(i).transpose() - V.col(c)).squaredNorm());
        }
    }
}

TEST(ClusteringLoss, Examples) {
    Matrix Z(2, 1);
    Z << 0, 2;
    EXPECT_EQ(clustering_loss(Z, Matrix::Ones(1, 1), {0, 0}), 2.0);
    Matrix V(1, 2);
    V << 0, 2;
    EXPECT_EQ(clustering_loss(Z, V, {0, 1}), 0.0);
}

TEST(ClusteringLoss, FrobeniusFormAndAlternationDescent) {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix Z = uniform_matrix(rng, 15, 3);
        ClusterState st;
        st.assignment = frdrl::testing::random_labels(rng, 15, 3);
        st.centers = uniform_matrix(rng, 3, 3);
        const double frob = (Z.transpose() - st.centers * st.partition_matrix()).squaredNorm();
        const double before = clustering_loss(Z, st.centers, st.assignment);
        EXPECT_NEAR(before, frob, 1e-12 * frob);
        const Matrix V = update_centers(Z, st.assignment, 3);
        EXPECT_LE(clustering_loss(Z, V, st.assignment), before);
        const Labels U = update_partition(Z, V);
        EXPECT_LE(clustering_loss(Z, V, U), clustering_loss(Z, V, st.assignment));
        st.assignment = U;
        const Matrix P = st.partition_matrix();
        for (Eigen::Index j = 0; j < P.cols(); ++j) EXPECT_EQ(P.col(j).sum(), 1.0);
    }
}

TEST(BalancedAssignment, SizesDifferByAtMostOne) {
    const Labels a = balanced_assignment(17, 4, 3);
    std::vector<int> counts(4, 0);
    for (int v : a) ++counts[static_cast<std::size_t>(v)];
    EXPECT_LE(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()), 1);
    EXPECT_EQ(a, balanced_assignment(17, 4, 3));
}

TEST(TrainClusterer, ThreeBlobsRecovered) {
    const Dataset data = minmax_normalize(frdrl::testing::gaussian_blobs(20, 3, 2, 10.0, 14));
    TrainConfig cfg;
    cfg.rules = 4;
    cfg.blocks = 5;
    cfg.outputs = 20;
    cfg.epochs = 100;
    cfg.lr = 1e-4;
    const ClustererFit fit = train_clusterer(data, cfg);
    EXPECT_DOUBLE_EQ(ari(fit.state.assignment, data.y), 1.0);
    EXPECT_EQ(fit.loss.size(), 100u);
    EXPECT_EQ(fit.model.task, Task::clustering);
}

TEST(TrainClusterer, ZeroEpochsIsOneAlternation) {
    const Dataset data = minmax_normalize(frdrl::testing::gaussian_blobs(10, 3, 2, 6.0, 15));
    TrainConfig cfg;
    cfg.rules = 3;
    cfg.blocks = 3;
    cfg.outputs = 5;
    cfg.epochs = 0;
    const ClustererFit fit = train_clusterer(data, cfg, 3);
    EXPECT_TRUE(fit.loss.empty());
    const Matrix Z = transform(fit.model, data.X);
    // The partition stream of the master seed yields the balanced start.
    const Labels start = balanced_assignment(data.rows(), 3, derive_seed(cfg.seed, 3));
    const Matrix V = update_centers(Z, start, 3);
    EXPECT_TRUE(fit.state.centers.isApprox(V, 1e-12));
    EXPECT_EQ(fit.state.assignment, update_partition(Z, V));
}

TEST(TrainClusterer, RejectsBadClusterCount) {
    const Dataset data = frdrl::testing::gaussian_blobs(3, 2, 2, 4.0, 16);
    TrainConfig cfg;
    cfg.rules = 2;
    cfg.knn = 2;
    EXPECT_THROW(train_clusterer(data, cfg, 7), ConfigError);
}
