#include "frdrl/unrolled.hpp"

#include "frdrl/rng.hpp"

#include <cmath>
#include <sstream>

namespace frdrl {

double soft_threshold(double v, double theta) {
    if (theta < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
    if (v > theta) return v - theta;
    if (v < -theta) return v + theta;
    return 0.0;
}

Matrix soft_threshold(const Matrix& V, double theta) {
    if (theta < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
    return V.unaryExpr([theta](double v) {
        if (v > theta) return v - theta;
        if (v < -theta) return v + theta;
        return 0.0;
    });
}

Matrix ista_layer(const Matrix& M, double Lc) {
    if (!(Lc > 0.0)) throw std::invalid_argument("ista_layer: Lipschitz constant must be positive");
    return Matrix::Identity(M.rows(), M.cols()) - M / Lc;
}

UnrolledStack init_stack(const Matrix& M, double Lc, double alpha, int blocks, int outputs,
                         std::uint64_t seed, bool per_block_threshold) {
    if (blocks < 1) throw std::invalid_argument("init_stack: need at least one block");
    if (outputs < 1) throw std::invalid_argument("init_stack: need at least one output");
    if (alpha < 0.0) throw std::invalid_argument("init_stack: alpha must be nonnegative");

    UnrolledStack stack;
    const Matrix G = ista_layer(M, Lc);
    stack.layers.assign(static_cast<std::size_t>(blocks), G);
    stack.thresholds.assign(per_block_threshold ? static_cast<std::size_t>(blocks) : 1U, alpha / Lc);

    Rng rng(seed);
    stack.initial.resize(M.rows(), outputs);
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index c = 0; c < stack.initial.cols(); ++c) {
        for (Eigen::Index r = 0; r < stack.initial.rows(); ++r) stack.initial(r, c) = rng.uniform(-0.1, 0.1);
    }
    return stack;
}

namespace {

void check_iterate(const Matrix& P, int block) {
    const bool finite = P.allFinite();
    if (finite && (P.size() == 0 || P.cwiseAbs().maxCoeff() <= kDivergenceBound)) return;
    std::ostringstream msg;
    msg << "unrolled solver diverged at block " << block
        << (finite ? " (iterate magnitude exceeds 1e12)" : " (non-finite iterate)");
    throw DivergenceError(msg.str());
}

}  // namespace

ForwardCache forward(const UnrolledStack& stack) {
    ForwardCache cache;
    cache.pre.reserve(stack.layers.size());
    cache.iterates.reserve(stack.layers.size() + 1);
    cache.iterates.push_back(stack.initial);
    for (int k = 0; k < stack.blocks(); ++k) {
        const Matrix& G = stack.layers[static_cast<std::size_t>(k)];
        if (G.rows() != G.cols() || G.cols() != stack.dimension()) {
            throw std::invalid_argument("forward: layer shape does not match the consequent dimension");
        }
        Matrix A = G * cache.iterates.back();
        Matrix P = soft_threshold(A, stack.threshold(k));
        check_iterate(P, k + 1);
        cache.pre.push_back(std::move(A));
        cache.iterates.push_back(std::move(P));
    }
    return cache;
}

Matrix classical_ista(const Matrix& M, double Lc, double alpha, const Matrix& P0, int iters) {
    if (!(Lc > 0.0)) throw std::invalid_argument("classical_ista: Lipschitz constant must be positive");
    const Matrix G = ista_layer(M, Lc);
    const double theta = alpha / Lc;
    Matrix P = P0;
    for (int k = 0; k < iters; ++k) {
        Matrix A = G * P;
        P = soft_threshold(A, theta);
    }
    return P;
}

StackGradients backward(const UnrolledStack& stack, const ForwardCache& cache, const Matrix& dPK) {
    const int K = stack.blocks();
    if (static_cast<int>(cache.pre.size()) != K || static_cast<int>(cache.iterates.size()) != K + 1) {
        throw std::invalid_argument("backward: cache does not belong to this stack");
    }
    if (dPK.rows() != stack.dimension() || dPK.cols() != stack.outputs()) {
        throw std::invalid_argument("backward: output gradient shape mismatch");
    }

    StackGradients grads;
    grads.layers.resize(static_cast<std::size_t>(K));
    grads.thresholds.assign(stack.thresholds.size(), 0.0);

    Matrix dP = dPK;
    for (int k = K - 1; k >= 0; --k) {
        const auto idx = static_cast<std::size_t>(k);
        const Matrix& A = cache.pre[idx];
        const double theta = stack.threshold(k);
        Matrix dA(A.rows(), A.cols());
        double dtheta = 0.0;
        for (Eigen::Index i = 0; i < A.size(); ++i) {
            const double a = A.data()[i];
            if (std::abs(a) > theta) {
                dA.data()[i] = dP.data()[i];
                dtheta -= (a > 0.0 ? 1.0 : -1.0) * dP.data()[i];
            } else {
                dA.data()[i] = 0.0;
            }
        }
        grads.thresholds[stack.shared_threshold() ? 0 : idx] += dtheta;
        grads.layers[idx] = dA * cache.iterates[idx].transpose();
        dP = stack.layers[idx].transpose() * dA;
    }
    return grads;
}

namespace {

double adam_step(double& m, double& v, double g, double lr, double c1, double c2, const AdamOptions& o) {
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g * g;
    return lr * (m / c1) / (std::sqrt(v / c2) + o.epsilon);
}

}  // namespace

void outer_update(UnrolledStack& stack, const StackGradients& grads, AdamState& state, double lr,
                  const AdamOptions& options) {
    if (!(lr > 0.0)) throw std::invalid_argument("outer_update: learning rate must be positive");
    if (grads.layers.size() != stack.layers.size() || grads.thresholds.size() != stack.thresholds.size()) {
        throw std::invalid_argument("outer_update: gradient shape mismatch");
    }
    if (state.step == 0) {
        state.layer_m.clear();
        state.layer_v.clear();
        for (const auto& G : stack.layers) {
            state.layer_m.push_back(Matrix::Zero(G.rows(), G.cols()));
            state.layer_v.push_back(Matrix::Zero(G.rows(), G.cols()));
        }
        state.threshold_m.assign(stack.thresholds.size(), 0.0);
        state.threshold_v.assign(stack.thresholds.size(), 0.0);
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));

    for (std::size_t k = 0; k < stack.layers.size(); ++k) {
        Matrix& G = stack.layers[k];
        const Matrix& g = grads.layers[k];
        double* m = state.layer_m[k].data();
        double* v = state.layer_v[k].data();
        for (Eigen::Index i = 0; i < G.size(); ++i) {
            G.data()[i] -= adam_step(m[i], v[i], g.data()[i], lr, c1, c2, options);
        }
    }
    for (std::size_t k = 0; k < stack.thresholds.size(); ++k) {
        double& theta = stack.thresholds[k];
        theta -= adam_step(state.threshold_m[k], state.threshold_v[k], grads.thresholds[k], lr, c1, c2, options);
        theta = std::max(theta, 0.0);
    }
}

}  // namespace frdrl
