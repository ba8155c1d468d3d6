#pragma once

#include "frdrl/common.hpp"
#include "frdrl/dataset.hpp"
#include "frdrl/geometry.hpp"
#include "frdrl/model.hpp"
#include "frdrl/unrolled.hpp"

#include <functional>
#include <vector>

namespace frdrl {

// ---- classification ------------------------------------------------------

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& Z);

/// |softmax(Z) - Y|_F^2 + beta |P|_F^2.
double classification_loss(const Matrix& Z, const Matrix& Y, const Matrix& P, double beta);

/// d/dZ of |softmax(Z) - Y|_F^2.
Matrix classification_grad(const Matrix& Z, const Matrix& Y);

struct StepResult {
    double loss = 0.0;
    StackGradients grads;
};

/// Loss and gradients of the whole classification objective w.r.t. the stack
/// parameters, with Z = Xg P_K. The ridge gradient 2 beta P_K enters at P_K.
StepResult classification_step(const UnrolledStack& stack, const Matrix& Xg, const Matrix& Y, double beta);

// ---- clustering ----------------------------------------------------------

/// Hard partition of N points into c clusters plus the m x c center matrix.
struct ClusterState {
    Matrix centers;  // V, m x c
    Labels assignment;  // column j of U is the indicator of assignment[j]

    [[nodiscard]] int clusters() const { return static_cast<int>(centers.cols()); }
    /// U as a c x N 0/1 matrix.
    [[nodiscard]] Matrix partition_matrix() const;
};

/// Cluster means of the rows of Z (equivalently (UZ)^T (UU^T)^-1). An empty
/// cluster is re-seeded at the row farthest from its assigned center.
Matrix update_centers(const Matrix& Z, const Labels& assignment, int clusters);

/// Nearest center per row of Z, ties to the lowest index.
Labels update_partition(const Matrix& Z, const Matrix& centers);

/// |Z^T - V U|_F^2.
double clustering_loss(const Matrix& Z, const Matrix& centers, const Labels& assignment);

/// Balanced random start: a seeded permutation dealt round-robin over clusters.
Labels balanced_assignment(int rows, int clusters, std::uint64_t seed);

// ---- training ------------------------------------------------------------

/// Everything derived from the training rows before the epoch loop.
struct Preparation {
    FuzzyAntecedent antecedent;
    Matrix Xg;
    GeometryOperators geometry;
};

Preparation prepare(const Matrix& X, const TrainConfig& config);

/// Called after every epoch with (epoch index, loss); lets callers log progress.
using EpochObserver = std::function<void(int, double)>;

struct ClassifierFit {
    Model model;
    std::vector<double> loss;  // one value per epoch, before that epoch's update
};

/// Full-batch training of the unrolled stack for classification. m is forced to c.
ClassifierFit train_classifier(const Dataset& train, const TrainConfig& config, const EpochObserver& observer = {});

struct ClustererFit {
    Model model;
    ClusterState state;
    std::vector<double> loss;
};

/// Transductive clustering with `clusters` groups; uses data.classes when clusters is 0.
ClustererFit train_clusterer(const Dataset& data, const TrainConfig& config, int clusters = 0,
                             const EpochObserver& observer = {});

/// Learned representation Z = Xg(X) P_final.
Matrix transform(const Model& model, const Matrix& X);

/// Arg-max class of every row of transform(model, X), ties to the lowest index.
Labels predict(const Model& model, const Matrix& X);

Labels argmax_rows(const Matrix& Z);

}  // namespace frdrl
