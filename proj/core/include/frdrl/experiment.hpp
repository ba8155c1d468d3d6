#pragma once

#include "frdrl/dataset.hpp"
#include "frdrl/heads.hpp"
#include "frdrl/metrics.hpp"
#include "frdrl/model.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace frdrl {

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` file; blank lines and lines starting with '#' are skipped.
/// Throws ConfigError on lines without '=' or duplicate keys.
KeyValues read_config_file(const std::filesystem::path& path);
KeyValues parse_key_values(const std::string& text, const std::string& source = "<memory>");

/// Every key an experiment configuration accepts.
const std::vector<std::string>& config_keys();

struct ExperimentConfig {
    Task task = Task::classification;
    std::filesystem::path data;
    std::filesystem::path out = "out";
    int folds = 5;
    int runs = 1;  // clustering repeats with derived seeds
    int clusters = 0;  // 0: number of distinct labels
    bool normalize = true;
    bool dump_graph = false;
    TrainConfig train;

    std::vector<int> grid_rules;
    std::vector<int> grid_blocks;
    std::vector<double> grid_lr;
    std::vector<int> grid_epochs;
    std::vector<int> grid_outputs;

    [[nodiscard]] bool has_grid() const {
        return !grid_rules.empty() || !grid_blocks.empty() || !grid_lr.empty() || !grid_epochs.empty() ||
               !grid_outputs.empty();
    }
};

/// Task-specific defaults: classification H=10, K=10, T=1000, lr=5e-5, m=c;
/// clustering H=4, K=5, T=100, lr=1e-4, m=20.
ExperimentConfig default_experiment(Task task);

/// Applies `values` on top of the defaults for `task`. A `task` key, if
/// present, overrides the argument. Unknown keys and bad values raise
/// ConfigError naming the key.
ExperimentConfig parse_experiment(const KeyValues& values, Task task);

/// Worker count from FRDRL_THREADS, else hardware concurrency (at least 1).
int worker_count();

/// Runs body(0..n-1) on up to `threads` workers. Exceptions are rethrown
/// after all workers finish, lowest index first.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

struct CrossValidation {
    std::vector<double> accuracy;
    std::vector<double> macro_f1;
    std::vector<std::vector<double>> loss;  // per fold, per epoch
    int best_fold = 0;  // highest test accuracy, ties to the lowest fold
    Model best_model;
    FoldPlan plan;
};

/// Stratified k-fold CV of the classifier. Fold f trains with seed
/// derive_seed(config.seed, stream, f). `data` should already be normalized.
CrossValidation cross_validate(const Dataset& data, const TrainConfig& config, int folds, int threads,
                               std::uint64_t stream = 0);

struct ClusteringRuns {
    std::vector<double> nmi;
    std::vector<double> ari;
    std::vector<std::vector<double>> loss;
    int best_run = 0;  // lowest final clustering loss; labels are not consulted
    ClustererFit best;
};

/// `runs` independent clusterings of the full dataset, scored against its labels.
ClusteringRuns cluster_runs(const Dataset& data, const TrainConfig& config, int clusters, int runs, int threads,
                            std::uint64_t stream = 0);

struct GridCell {
    int rules = 0;
    int blocks = 0;
    double lr = 0.0;
    int epochs = 0;
    int outputs = 0;
    double score_mean = 0.0;  // mean ACC (classification) or NMI (clustering)
    double score_std = 0.0;
    double secondary_mean = 0.0;  // mean mF1 or ARI
    bool diverged = false;
};

/// Cross product of the grid lists (missing lists fall back to the base
/// value), scored and sorted by descending score_mean; diverged cells last.
std::vector<GridCell> run_grid(const Dataset& data, const ExperimentConfig& config, int threads);

std::string grid_csv(const std::vector<GridCell>& cells, Task task);

// Commands. Each returns the process exit code: 0 ok, 1 configuration error,
// 2 data error, 3 numerical divergence.
int cmd_classify(const ExperimentConfig& config);
int cmd_cluster(const ExperimentConfig& config);
int cmd_grid(const ExperimentConfig& config);
int cmd_export_rules(const std::filesystem::path& model_path, const std::optional<std::filesystem::path>& data_path,
                     const std::filesystem::path& out_dir);

/// Maps the library's exception types onto exit codes, printing the message to stderr.
int run_guarded(const std::function<int()>& body);

}  // namespace frdrl
