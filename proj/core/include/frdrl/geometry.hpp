#pragma once

#include "frdrl/common.hpp"

#include <optional>

namespace frdrl {

struct Similarity {
    Matrix S;  // symmetric, nonnegative, zero diagonal
    double bandwidth = 1.0;  // kernel sigma actually used
};

/// Gaussian-kernel kNN graph over the rows of `points`. Each row links to its
/// k nearest other rows (ties broken by lower index); the raw directed
/// weights are averaged with their transpose. Without an explicit bandwidth,
/// sigma is the median kNN distance (1 if that median is zero).
Similarity knn_similarity(const Matrix& points, int k, std::optional<double> bandwidth = std::nullopt);

/// D - S. Throws std::invalid_argument if S is not symmetric.
Matrix laplacian(const Matrix& S);

/// I - S.
Matrix second_order_operator(const Matrix& S);

/// Xg^T (Lg + Lambda^T Lambda) Xg, symmetrized.
Matrix combined_operator(const Matrix& Xg, const Matrix& Lg, const Matrix& Lambda);

struct PowerIterationOptions {
    double tol = 1e-6;
    int max_iter = 1000;
    double safety = 1.01;
};

/// Upper estimate of the largest eigenvalue of a symmetric PSD matrix:
/// power iteration times a safety factor. Returns 1 for the zero matrix.
double lipschitz_estimate(const Matrix& M, const PowerIterationOptions& options = {});

struct GeometryOperators {
    Matrix S;
    Matrix Lg;
    Matrix Lambda;
    Matrix M;
    double Lc = 1.0;
    double bandwidth = 1.0;
};

struct GraphOptions {
    int k = 5;
    std::optional<double> bandwidth;
};

/// Builds the similarity graph on `graph_points` and the quadratic operator on `Xg`.
/// Both must have the same number of rows.
GeometryOperators build_geometry(const Matrix& graph_points, const Matrix& Xg, const GraphOptions& options);

}  // namespace frdrl
