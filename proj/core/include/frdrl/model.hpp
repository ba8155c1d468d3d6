#pragma once

#include "frdrl/antecedent.hpp"
#include "frdrl/common.hpp"
#include "frdrl/unrolled.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace frdrl {

enum class Task { classification, clustering };

// Which rows the similarity graph is built on.
enum class GraphSpace { fuzzy, original };

std::string to_string(Task task);
std::string to_string(GraphSpace space);

struct TrainConfig {
    int rules = 10;  // H
    int blocks = 10;  // K
    int outputs = 0;  // m; 0 means "number of classes" for classification
    double alpha = 1e-4;
    double beta = 0.01;
    double lr = 5e-5;
    int epochs = 1000;  // T
    int knn = 5;
    std::optional<double> bandwidth;  // empty: median kNN distance
    std::uint64_t seed = 42;
    double fuzzifier = 2.0;
    double fcm_tol = 1e-5;
    int fcm_max_iter = 100;
    GraphSpace graph_space = GraphSpace::fuzzy;
    bool per_block_threshold = false;

    /// Throws ConfigError naming the offending field. epochs may be 0.
    void validate() const;
};

struct Model {
    Task task = Task::classification;
    FuzzyAntecedent antecedent;
    UnrolledStack stack;
    Matrix consequent;  // P_K of `stack`, d_g x m
    TrainConfig config;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
};

inline constexpr const char* kModelFormat = "frdrl-model";
inline constexpr int kModelVersion = 1;

/// JSON text with round-trip exact reals.
std::string serialize_model(const Model& model);
/// Throws DataError on malformed, wrong-format or inconsistent documents.
Model deserialize_model(const std::string& text);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace frdrl
