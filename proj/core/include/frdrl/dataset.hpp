#pragma once

#include "frdrl/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace frdrl {

/// Tabular dataset: N feature rows, dense labels 0..c-1.
struct Dataset {
    Matrix X;
    Labels y;
    int classes = 0;
    std::vector<std::string> feature_names;
    // Original label text, indexed by dense label id.
    std::vector<std::string> class_names;

    [[nodiscard]] int rows() const { return static_cast<int>(X.rows()); }
    [[nodiscard]] int features() const { return static_cast<int>(X.cols()); }

    /// Rows selected by index, same class coding.
    [[nodiscard]] Dataset subset(const std::vector<int>& indices) const;

    /// Throws DataError when the invariants (N>=1, d>=1, c>=2, labels in range) do not hold.
    void validate() const;
};

struct Fold {
    std::vector<int> train;
    std::vector<int> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
    std::uint64_t seed = 0;
    // false when some class had fewer members than folds and plain k-fold was used.
    bool stratified = true;
};

/// Reads a headed CSV whose last column is the label. Labels are re-indexed
/// in order of first appearance.
Dataset load_csv(const std::filesystem::path& path);

/// Same as load_csv, from text already in memory. `source` names it in errors.
Dataset parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Affine map of every column onto [0, 1]; constant columns become 0.
Dataset minmax_normalize(const Dataset& data);

/// Deterministic stratified k-fold split. Falls back to shuffled k-fold
/// (stratified = false) when a class has fewer than k members.
FoldPlan stratified_kfold(const Dataset& data, int k, std::uint64_t seed);

/// N x c indicator matrix.
Matrix one_hot(const Labels& y, int classes);

}  // namespace frdrl
