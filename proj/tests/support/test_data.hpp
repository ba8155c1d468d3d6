#pragma once

#include "frdrl/common.hpp"
#include "frdrl/dataset.hpp"
#include "frdrl/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace frdrl::testing {

inline Matrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
    }
    return m;
}

// Box-Muller; one draw per call keeps the stream easy to reason about.
inline double normal(Rng& rng) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Labels random_labels(Rng& rng, int n, int classes) {
    Labels y(static_cast<std::size_t>(n));
    for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    return y;
}

/// Isotropic unit-variance blobs with centers `separation` apart on a regular simplex-like layout.
inline Dataset gaussian_blobs(int per_blob, int blobs, int dims, double separation, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    data.classes = blobs;
    data.X.resize(per_blob * blobs, dims);
    for (int b = 0; b < blobs; ++b) {
        RowVector center = RowVector::Zero(dims);
        const double angle = 2.0 * std::numbers::pi * b / blobs;
        // Vertices of a regular polygon with side length `separation`.
        const double radius = separation / (2.0 * std::sin(std::numbers::pi / blobs));
        center(0) = radius * std::cos(angle);
        if (dims > 1) center(1) = radius * std::sin(angle);
        for (int i = 0; i < per_blob; ++i) {
            const int row = b * per_blob + i;
            for (int j = 0; j < dims; ++j) data.X(row, j) = center(j) + normal(rng);
            data.y.push_back(b);
        }
        data.class_names.push_back("blob" + std::to_string(b));
    }
    for (int j = 0; j < dims; ++j) data.feature_names.push_back("f" + std::to_string(j + 1));
    return data;
}

inline std::string data_path(const std::string& name) { return std::string(FRDRL_DATA_DIR) + "/" + name; }

}  // namespace frdrl::testing
