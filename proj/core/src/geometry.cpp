#include "frdrl/geometry.hpp"

#include "frdrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace frdrl {

Similarity knn_similarity(const Matrix& points, int k, std::optional<double> bandwidth) {
    const Eigen::Index n = points.rows();
    if (k < 1 || k >= n) throw std::invalid_argument("knn_similarity: k must be in [1, N)");
    if (bandwidth && !(*bandwidth > 0.0)) throw std::invalid_argument("knn_similarity: bandwidth must be positive");

    const Vector sq = points.rowwise().squaredNorm();
    Matrix dist2 = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * points * points.transpose())
                       .cwiseMax(0.0);
    // Gram-form distances only rank candidates; kept neighbors get exact row differences.
    std::vector<std::vector<std::pair<Eigen::Index, double>>> neighbors(static_cast<std::size_t>(n));
    std::vector<double> knn_dist;
    knn_dist.reserve(static_cast<std::size_t>(n * k));
    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < n; ++i) {
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        order.erase(order.begin() + i);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return dist2(i, a) < dist2(i, b) || (dist2(i, a) == dist2(i, b) && a < b);
        });
        for (int r = 0; r < k; ++r) {
            const Eigen::Index j = order[static_cast<std::size_t>(r)];
            const double exact = (points.row(i) - points.row(j)).squaredNorm();
            neighbors[static_cast<std::size_t>(i)].emplace_back(j, exact);
            knn_dist.push_back(std::sqrt(exact));
        }
    }

    double sigma = 1.0;
    if (bandwidth) {
        sigma = *bandwidth;
    } else {
        auto mid = knn_dist.begin() + static_cast<std::ptrdiff_t>(knn_dist.size() / 2);
        std::nth_element(knn_dist.begin(), mid, knn_dist.end());
        double median = *mid;
        if (knn_dist.size() % 2 == 0) {
            median = 0.5 * (median + *std::max_element(knn_dist.begin(), mid));
        }
        if (median > 0.0) sigma = median;
    }

    Matrix raw = Matrix::Zero(n, n);
    const double scale = 1.0 / (2.0 * sigma * sigma);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (const auto& [j, d2] : neighbors[static_cast<std::size_t>(i)]) raw(i, j) = std::exp(-d2 * scale);
    }
    Similarity out;
    out.bandwidth = sigma;
    out.S.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out.S(i, j) = i == j ? 0.0 : 0.5 * (raw(i, j) + raw(j, i));
    }
    return out;
}

Matrix laplacian(const Matrix& S) {
    if (S.rows() != S.cols()) throw std::invalid_argument("laplacian: S must be square");
    if (!(S.array() == S.transpose().array()).all()) throw std::invalid_argument("laplacian: S is not symmetric");
    Matrix Lg = -S;
    Lg.diagonal() = S.rowwise().sum() - S.diagonal();
    return Lg;
}

Matrix second_order_operator(const Matrix& S) {
    return Matrix::Identity(S.rows(), S.cols()) - S;
}

Matrix combined_operator(const Matrix& Xg, const Matrix& Lg, const Matrix& Lambda) {
    if (Lg.rows() != Xg.rows() || Lambda.rows() != Xg.rows()) {
        throw std::invalid_argument("combined_operator: row count mismatch");
    }
    const Matrix inner = Lg + Lambda.transpose() * Lambda;
    const Matrix M = Xg.transpose() * inner * Xg;
    return 0.5 * (M + M.transpose());
}

double lipschitz_estimate(const Matrix& M, const PowerIterationOptions& options) {
    if (M.rows() != M.cols()) throw std::invalid_argument("lipschitz_estimate: M must be square");
    if (M.size() == 0 || M.cwiseAbs().maxCoeff() == 0.0) return 1.0;

    Rng rng(0x5eedULL);
    Vector v(M.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(0.5, 1.5);
    v.normalize();

    double lambda = 0.0;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        Vector w = M * v;
        const double norm = w.norm();
        if (norm == 0.0) break;
        const double next = v.dot(w);
        v = w / norm;
        const bool converged = iter > 0 && std::abs(next - lambda) <= options.tol * std::abs(next);
        lambda = next;
        if (converged) break;
    }
    lambda = std::max(lambda, v.dot(M * v));
    return lambda > 0.0 ? lambda * options.safety : 1.0;
}

GeometryOperators build_geometry(const Matrix& graph_points, const Matrix& Xg, const GraphOptions& options) {
    if (graph_points.rows() != Xg.rows()) throw std::invalid_argument("build_geometry: row count mismatch");
    GeometryOperators ops;
    auto sim = knn_similarity(graph_points, options.k, options.bandwidth);
    ops.S = std::move(sim.S);
    ops.bandwidth = sim.bandwidth;
    ops.Lg = laplacian(ops.S);
    ops.Lambda = second_order_operator(ops.S);
    ops.M = combined_operator(Xg, ops.Lg, ops.Lambda);
    ops.Lc = lipschitz_estimate(ops.M);
    return ops;
}

}  // namespace frdrl
