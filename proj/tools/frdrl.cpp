// frdrl: command-line driver for classification, clustering, grid search and rule export.

#include "frdrl/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::optional<std::string> config;
    std::map<std::string, std::string> values;
};

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

// One string-valued flag per configuration key, except those the subcommand owns.
void add_key_flags(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "key=value configuration file");
    for (const auto& key : frdrl::config_keys()) {
        if (key == "task") continue;
        app->add_option_function<std::string>(
            flag_name(key), [&o, key](const std::string& v) { o.values[key] = v; }, "overrides '" + key + "'");
    }
}

int run_experiment(const Overrides& o, frdrl::Task task, int (*command)(const frdrl::ExperimentConfig&)) {
    return frdrl::run_guarded([&] {
        frdrl::KeyValues values;
        if (o.config) values = frdrl::read_config_file(*o.config);
        for (const auto& [key, value] : o.values) values[key] = value;
        if (auto it = values.find("task"); it != values.end()) {
            const bool cluster = it->second == "cluster" || it->second == "clustering";
            if (cluster != (task == frdrl::Task::clustering)) {
                throw frdrl::ConfigError("config key 'task' = '" + it->second + "' conflicts with the subcommand");
            }
        }
        return command(frdrl::parse_experiment(values, task));
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy rule-based deep representation learning"};
    app.require_subcommand(1);

    Overrides classify_opts;
    auto* classify = app.add_subcommand("classify", "stratified k-fold classification");
    add_key_flags(classify, classify_opts);

    Overrides cluster_opts;
    auto* cluster = app.add_subcommand("cluster", "clustering on the full dataset");
    add_key_flags(cluster, cluster_opts);

    Overrides grid_opts;
    std::string grid_task = "classify";
    auto* grid = app.add_subcommand("grid", "grid search over rules/blocks/lr/epochs/outputs");
    add_key_flags(grid, grid_opts);
    grid->add_option("--task", grid_task, "classify or cluster")->check(CLI::IsMember({"classify", "cluster"}));

    std::string model_path;
    std::optional<std::string> schema_path;
    std::string rules_out = "out";
    auto* rules = app.add_subcommand("export-rules", "write the rule base of a saved model");
    rules->add_option("--model", model_path, "model.json written by classify or cluster")->required();
    rules->add_option("--data", schema_path, "CSV whose header supplies feature names");
    rules->add_option("--out", rules_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*classify) return run_experiment(classify_opts, frdrl::Task::classification, frdrl::cmd_classify);
    if (*cluster) return run_experiment(cluster_opts, frdrl::Task::clustering, frdrl::cmd_cluster);
    if (*grid) {
        if (grid->count("--task") == 0 && grid_opts.config) {
            // Let a task key in the file pick the task when no flag is given.
            grid_opts.values.erase("task");
            const auto task_from_file = frdrl::run_guarded([&] {
                const auto values = frdrl::read_config_file(*grid_opts.config);
                if (auto it = values.find("task"); it != values.end()) grid_task = it->second;
                return 0;
            });
            if (task_from_file != 0) return task_from_file;
        }
        const auto task = grid_task == "cluster" || grid_task == "clustering" ? frdrl::Task::clustering
                                                                                : frdrl::Task::classification;
        return run_experiment(grid_opts, task, frdrl::cmd_grid);
    }
    if (*rules) {
        std::optional<std::filesystem::path> schema;
        if (schema_path) schema = *schema_path;
        return frdrl::cmd_export_rules(model_path, schema, rules_out);
    }
    return 1;
}
