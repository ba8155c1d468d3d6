#pragma once

#include "frdrl/common.hpp"

#include <cstdint>
#include <vector>

namespace frdrl {

/// Elementwise shrinkage toward zero by theta (the l1 proximal map).
/// Throws std::invalid_argument for negative theta.
Matrix soft_threshold(const Matrix& V, double theta);
double soft_threshold(double v, double theta);

/// K learnable blocks P_k = soft_threshold(G_k P_{k-1}, theta). The starting
/// iterate P0 is fixed; only the layers and the threshold(s) are trained.
struct UnrolledStack {
    std::vector<Matrix> layers;
    // One entry when the threshold is shared across blocks, otherwise one per block.
    std::vector<double> thresholds;
    Matrix initial;

    [[nodiscard]] int blocks() const { return static_cast<int>(layers.size()); }
    [[nodiscard]] int dimension() const { return static_cast<int>(initial.rows()); }
    [[nodiscard]] int outputs() const { return static_cast<int>(initial.cols()); }
    [[nodiscard]] bool shared_threshold() const { return thresholds.size() == 1; }
    [[nodiscard]] double threshold(int block) const {
        return shared_threshold() ? thresholds.front() : thresholds[static_cast<std::size_t>(block)];
    }
};

struct ForwardCache {
    std::vector<Matrix> pre;  // A_k = G_k P_{k-1}, k = 1..K
    std::vector<Matrix> iterates;  // P_0..P_K

    [[nodiscard]] const Matrix& output() const { return iterates.back(); }
};

struct StackGradients {
    std::vector<Matrix> layers;
    std::vector<double> thresholds;
};

/// Any iterate entry beyond this magnitude counts as divergence.
inline constexpr double kDivergenceBound = 1e12;

/// One ISTA step operator for the quadratic form with matrix M: I - M / Lc.
Matrix ista_layer(const Matrix& M, double Lc);

/// Every block starts as the ISTA step I - M/Lc with threshold alpha/Lc, so an
/// untrained stack reproduces K ISTA iterations. P0 is uniform in [-0.1, 0.1].
UnrolledStack init_stack(const Matrix& M, double Lc, double alpha, int blocks, int outputs,
                         std::uint64_t seed, bool per_block_threshold = false);

/// Throws DivergenceError on a non-finite or exploding iterate.
ForwardCache forward(const UnrolledStack& stack);

/// Plain ISTA on 1/2 tr(P^T M P) + alpha |P|_1 with step 1/Lc.
Matrix classical_ista(const Matrix& M, double Lc, double alpha, const Matrix& P0, int iters);

/// Reverse sweep given dLoss/dP_K. The shrinkage derivative is 1 where
/// |A_k| > theta and 0 elsewhere, boundary included.
StackGradients backward(const UnrolledStack& stack, const ForwardCache& cache, const Matrix& dPK);

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Matrix> layer_m;
    std::vector<Matrix> layer_v;
    std::vector<double> threshold_m;
    std::vector<double> threshold_v;
    long step = 0;
};

/// Adaptive-moment step on every layer and threshold; thresholds are clamped at 0 afterwards.
void outer_update(UnrolledStack& stack, const StackGradients& grads, AdamState& state, double lr,
                  const AdamOptions& options = {});

}  // namespace frdrl
