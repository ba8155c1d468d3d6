#include "frdrl/heads.hpp"

#include "frdrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace frdrl {

namespace {

enum SeedStream : std::uint64_t { kAntecedentStream = 1, kConsequentStream = 2, kPartitionStream = 3 };

}  // namespace

Matrix softmax_rows(const Matrix& Z) {
    Matrix out(Z.rows(), Z.cols());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const double top = Z.row(i).maxCoeff();
        out.row(i) = (Z.row(i).array() - top).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

double classification_loss(const Matrix& Z, const Matrix& Y, const Matrix& P, double beta) {
    if (Z.rows() != Y.rows() || Z.cols() != Y.cols()) throw std::invalid_argument("classification_loss: shape mismatch");
    const double fit = Z.rows() == 0 ? 0.0 : (softmax_rows(Z) - Y).squaredNorm();
    return fit + beta * P.squaredNorm();
}

Matrix classification_grad(const Matrix& Z, const Matrix& Y) {
    if (Z.rows() != Y.rows() || Z.cols() != Y.cols()) throw std::invalid_argument("classification_grad: shape mismatch");
    const Matrix s = softmax_rows(Z);
    const Matrix g = 2.0 * (s - Y);
    // Softmax Jacobian-vector product: s * (g - <g, s>).
    const Vector gs = (g.array() * s.array()).rowwise().sum();
    return (s.array() * (g.colwise() - gs).array()).matrix();
}

StepResult classification_step(const UnrolledStack& stack, const Matrix& Xg, const Matrix& Y, double beta) {
    const ForwardCache cache = forward(stack);
    const Matrix& P = cache.output();
    const Matrix Z = Xg * P;
    StepResult out;
    out.loss = classification_loss(Z, Y, P, beta);
    const Matrix dP = Xg.transpose() * classification_grad(Z, Y) + 2.0 * beta * P;
    out.grads = backward(stack, cache, dP);
    return out;
}

Matrix ClusterState::partition_matrix() const {
    Matrix U = Matrix::Zero(clusters(), static_cast<Eigen::Index>(assignment.size()));
    for (std::size_t j = 0; j < assignment.size(); ++j) U(assignment[j], static_cast<Eigen::Index>(j)) = 1.0;
    return U;
}

Matrix update_centers(const Matrix& Z, const Labels& assignment, int clusters) {
    if (static_cast<Eigen::Index>(assignment.size()) != Z.rows()) {
        throw std::invalid_argument("update_centers: assignment length differs from row count");
    }
    const Eigen::Index m = Z.cols();
    Matrix V = Matrix::Zero(m, clusters);
    std::vector<int> counts(static_cast<std::size_t>(clusters), 0);
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
        const int a = assignment[static_cast<std::size_t>(j)];
        if (a < 0 || a >= clusters) throw std::invalid_argument("update_centers: cluster id out of range");
        for (Eigen::Index l = 0; l < m; ++l) V(l, a) += Z(j, l);
        ++counts[static_cast<std::size_t>(a)];
    }
    std::vector<int> empty;
    for (int c = 0; c < clusters; ++c) {
        const int n = counts[static_cast<std::size_t>(c)];
        if (n == 0) {
            empty.push_back(c);
            continue;
        }
        for (Eigen::Index l = 0; l < m; ++l) V(l, c) /= n;
    }
    if (empty.empty()) return V;

    // Farthest rows from their own (non-empty) centers take over the empty slots.
    std::vector<double> spread(static_cast<std::size_t>(Z.rows()));
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
        spread[static_cast<std::size_t>(j)] = (Z.row(j).transpose() - V.col(assignment[static_cast<std::size_t>(j)])).squaredNorm();
    }
    for (int c : empty) {
        const auto far = std::max_element(spread.begin(), spread.end());
        const auto j = static_cast<Eigen::Index>(far - spread.begin());
        V.col(c) = Z.row(j).transpose();
        *far = -1.0;
    }
    return V;
}

Labels update_partition(const Matrix& Z, const Matrix& centers) {
    if (Z.cols() != centers.rows()) throw std::invalid_argument("update_partition: dimension mismatch");
    Labels out(static_cast<std::size_t>(Z.rows()), 0);
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centers.cols(); ++c) {
            double dist = 0.0;
            for (Eigen::Index l = 0; l < Z.cols(); ++l) {
                const double diff = Z(j, l) - centers(l, c);
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                out[static_cast<std::size_t>(j)] = static_cast<int>(c);
            }
        }
    }
    return out;
}

double clustering_loss(const Matrix& Z, const Matrix& centers, const Labels& assignment) {
    if (static_cast<Eigen::Index>(assignment.size()) != Z.rows() || Z.cols() != centers.rows()) {
        throw std::invalid_argument("clustering_loss: shape mismatch");
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
        total += (Z.row(j).transpose() - centers.col(assignment[static_cast<std::size_t>(j)])).squaredNorm();
    }
    return total;
}

Labels balanced_assignment(int rows, int clusters, std::uint64_t seed) {
    if (clusters < 1) throw std::invalid_argument("balanced_assignment: need at least one cluster");
    std::vector<int> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    Labels out(static_cast<std::size_t>(rows), 0);
    for (int r = 0; r < rows; ++r) out[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r % clusters;
    return out;
}

Preparation prepare(const Matrix& X, const TrainConfig& config) {
    config.validate();
    if (config.knn >= X.rows()) throw ConfigError("knn must be smaller than the number of training rows");
    if (config.rules > X.rows()) throw ConfigError("rules must not exceed the number of training rows");
    Preparation prep;
    const FcmEstimator estimator({config.fuzzifier, config.fcm_tol, config.fcm_max_iter});
    prep.antecedent = fit_antecedent(X, config.rules, estimator, derive_seed(config.seed, kAntecedentStream));
    prep.Xg = fuzzy_map(X, prep.antecedent);
    const Matrix& graph_points = config.graph_space == GraphSpace::fuzzy ? prep.Xg : X;
    prep.geometry = build_geometry(graph_points, prep.Xg, {config.knn, config.bandwidth});
    return prep;
}

ClassifierFit train_classifier(const Dataset& train, const TrainConfig& config, const EpochObserver& observer) {
    train.validate();
    TrainConfig cfg = config;
    cfg.outputs = train.classes;
    Preparation prep = prepare(train.X, cfg);

    const auto& geo = prep.geometry;
    UnrolledStack stack = init_stack(geo.M, geo.Lc, cfg.alpha, cfg.blocks, cfg.outputs,
                                     derive_seed(cfg.seed, kConsequentStream), cfg.per_block_threshold);
    const Matrix Y = one_hot(train.y, train.classes);

    ClassifierFit fit;
    fit.loss.reserve(static_cast<std::size_t>(cfg.epochs));
    AdamState adam;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        StepResult step = classification_step(stack, prep.Xg, Y, cfg.beta);
        if (!std::isfinite(step.loss)) throw DivergenceError("classification loss is not finite");
        fit.loss.push_back(step.loss);
        outer_update(stack, step.grads, adam, cfg.lr);
        if (observer) observer(epoch, step.loss);
    }

    fit.model.task = Task::classification;
    fit.model.consequent = forward(stack).output();
    fit.model.antecedent = std::move(prep.antecedent);
    fit.model.stack = std::move(stack);
    fit.model.config = cfg;
    fit.model.feature_names = train.feature_names;
    fit.model.class_names = train.class_names;
    return fit;
}

ClustererFit train_clusterer(const Dataset& data, const TrainConfig& config, int clusters,
                             const EpochObserver& observer) {
    if (data.rows() < 1 || data.features() < 1) throw DataError("clustering needs a nonempty dataset");
    const int c = clusters > 0 ? clusters : data.classes;
    if (c < 1 || c > data.rows()) throw ConfigError("cluster count must be in [1, N]");
    TrainConfig cfg = config;
    if (cfg.outputs == 0) cfg.outputs = 20;
    Preparation prep = prepare(data.X, cfg);

    const auto& geo = prep.geometry;
    UnrolledStack stack = init_stack(geo.M, geo.Lc, cfg.alpha, cfg.blocks, cfg.outputs,
                                     derive_seed(cfg.seed, kConsequentStream), cfg.per_block_threshold);

    ClustererFit fit;
    fit.state.assignment = balanced_assignment(data.rows(), c, derive_seed(cfg.seed, kPartitionStream));
    AdamState adam;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const ForwardCache cache = forward(stack);
        const Matrix Z = prep.Xg * cache.output();
        fit.state.centers = update_centers(Z, fit.state.assignment, c);
        fit.state.assignment = update_partition(Z, fit.state.centers);
        const double loss = clustering_loss(Z, fit.state.centers, fit.state.assignment);
        if (!std::isfinite(loss)) throw DivergenceError("clustering loss is not finite");
        fit.loss.push_back(loss);

        // V and U are held fixed: d/dZ |Z^T - VU|^2 = 2 (Z - (VU)^T).
        const Matrix target = (fit.state.centers * fit.state.partition_matrix()).transpose();
        const Matrix dP = prep.Xg.transpose() * (2.0 * (Z - target));
        outer_update(stack, backward(stack, cache, dP), adam, cfg.lr);
        if (observer) observer(epoch, loss);
    }

    fit.model.consequent = forward(stack).output();
    const Matrix Z = prep.Xg * fit.model.consequent;
    fit.state.centers = update_centers(Z, fit.state.assignment, c);
    fit.state.assignment = update_partition(Z, fit.state.centers);

    fit.model.task = Task::clustering;
    fit.model.antecedent = std::move(prep.antecedent);
    fit.model.stack = std::move(stack);
    fit.model.config = cfg;
    fit.model.feature_names = data.feature_names;
    fit.model.class_names = data.class_names;
    return fit;
}

Matrix transform(const Model& model, const Matrix& X) {
    if (X.cols() != model.antecedent.features()) {
        throw std::invalid_argument("transform: expected " + std::to_string(model.antecedent.features()) +
                                    " features, got " + std::to_string(X.cols()));
    }
    return fuzzy_map(X, model.antecedent) * model.consequent;
}

Labels argmax_rows(const Matrix& Z) {
    Labels out(static_cast<std::size_t>(Z.rows()), 0);
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < Z.cols(); ++c) {
            if (Z(i, c) > Z(i, best)) best = c;
        }
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

Labels predict(const Model& model, const Matrix& X) {
    return argmax_rows(transform(model, X));
}

}  // namespace frdrl
