#include "frdrl/experiment.hpp"

#include "frdrl/rng.hpp"
#include "frdrl/rules.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace frdrl {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
    const std::string text = trim(raw);
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ConfigError("invalid value for key '" + key + "': '" + raw + "'");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string text = trim(raw);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("invalid value for key '" + key + "': '" + raw + "' (expected true/false)");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
    std::vector<T> out;
    std::stringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_number<T>(key, item));
    }
    if (out.empty()) throw ConfigError("key '" + key + "' needs at least one value");
    return out;
}

Task parse_task(const std::string& raw) {
    const std::string text = trim(raw);
    if (text == "classify" || text == "classification") return Task::classification;
    if (text == "cluster" || text == "clustering") return Task::clustering;
    throw ConfigError("invalid value for key 'task': '" + raw + "' (expected classify or cluster)");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failure on " + path.string());
}

std::string loss_csv(const std::vector<std::vector<double>>& series, const char* column) {
    std::ostringstream out;
    out << "epoch";
    for (std::size_t s = 0; s < series.size(); ++s) out << ',' << column << s + 1;
    out << '\n';
    std::size_t epochs = 0;
    for (const auto& s : series) epochs = std::max(epochs, s.size());
    for (std::size_t e = 0; e < epochs; ++e) {
        out << e + 1;
        for (const auto& s : series) out << ',' << (e < s.size() ? format_real(s[e]) : "");
        out << '\n';
    }
    return out.str();
}

std::string matrix_csv(const Matrix& m) {
    std::ostringstream out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_real(m(r, c));
        out << '\n';
    }
    return out.str();
}

Dataset load_for(const ExperimentConfig& config) {
    if (config.data.empty()) throw ConfigError("missing required key 'data'");
    Dataset data = load_csv(config.data);
    return config.normalize ? minmax_normalize(data) : data;
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        if (!out.emplace(key, trim(t.substr(eq + 1))).second) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_key_values(buffer.str(), path.string());
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "task",         "data",         "out",          "seed",        "folds",      "runs",
        "clusters",     "normalize",    "dump_graph",   "rules",       "blocks",     "outputs",
        "alpha",        "beta",         "lr",           "epochs",      "knn",        "bandwidth",
        "fuzzifier",    "fcm_tol",      "fcm_max_iter", "graph_space", "per_block_threshold",
        "grid_rules",   "grid_blocks",  "grid_lr",      "grid_epochs", "grid_outputs"};
    return keys;
}

ExperimentConfig default_experiment(Task task) {
    ExperimentConfig c;
    c.task = task;
    if (task == Task::clustering) {
        c.train.rules = 4;
        c.train.blocks = 5;
        c.train.outputs = 20;
        c.train.epochs = 100;
        c.train.lr = 1e-4;
    }
    return c;
}

ExperimentConfig parse_experiment(const KeyValues& values, Task task) {
    const auto& known = config_keys();
    for (const auto& [key, value] : values) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
    }
    if (auto it = values.find("task"); it != values.end()) task = parse_task(it->second);

    ExperimentConfig c = default_experiment(task);
    TrainConfig& t = c.train;
    for (const auto& [key, value] : values) {
        if (key == "task") continue;
        if (key == "data") c.data = trim(value);
        else if (key == "out") c.out = trim(value);
        else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "folds") c.folds = parse_number<int>(key, value);
        else if (key == "runs") c.runs = parse_number<int>(key, value);
        else if (key == "clusters") c.clusters = parse_number<int>(key, value);
        else if (key == "normalize") c.normalize = parse_bool(key, value);
        else if (key == "dump_graph") c.dump_graph = parse_bool(key, value);
        else if (key == "rules") t.rules = parse_number<int>(key, value);
        else if (key == "blocks") t.blocks = parse_number<int>(key, value);
        else if (key == "outputs") t.outputs = parse_number<int>(key, value);
        else if (key == "alpha") t.alpha = parse_number<double>(key, value);
        else if (key == "beta") t.beta = parse_number<double>(key, value);
        else if (key == "lr") t.lr = parse_number<double>(key, value);
        else if (key == "epochs") t.epochs = parse_number<int>(key, value);
        else if (key == "knn") t.knn = parse_number<int>(key, value);
        else if (key == "bandwidth") {
            if (trim(value) == "auto") t.bandwidth.reset();
            else t.bandwidth = parse_number<double>(key, value);
        }
        else if (key == "fuzzifier") t.fuzzifier = parse_number<double>(key, value);
        else if (key == "fcm_tol") t.fcm_tol = parse_number<double>(key, value);
        else if (key == "fcm_max_iter") t.fcm_max_iter = parse_number<int>(key, value);
        else if (key == "graph_space") {
            const std::string v = trim(value);
            if (v == "fuzzy") t.graph_space = GraphSpace::fuzzy;
            else if (v == "original") t.graph_space = GraphSpace::original;
            else throw ConfigError("invalid value for key 'graph_space': '" + value + "' (expected fuzzy or original)");
        }
        else if (key == "per_block_threshold") t.per_block_threshold = parse_bool(key, value);
        else if (key == "grid_rules") c.grid_rules = parse_list<int>(key, value);
        else if (key == "grid_blocks") c.grid_blocks = parse_list<int>(key, value);
        else if (key == "grid_lr") c.grid_lr = parse_list<double>(key, value);
        else if (key == "grid_epochs") c.grid_epochs = parse_list<int>(key, value);
        else if (key == "grid_outputs") c.grid_outputs = parse_list<int>(key, value);
    }

    t.validate();
    if (c.folds < 2) throw ConfigError("folds must be at least 2");
    if (c.runs < 1) throw ConfigError("runs must be at least 1");
    if (c.clusters < 0) throw ConfigError("clusters must be nonnegative");
    auto positive = [](const auto& list, const char* key) {
        for (auto v : list) {
            if (!(v > 0)) throw ConfigError(std::string("grid values for '") + key + "' must be positive");
        }
    };
    positive(c.grid_rules, "grid_rules");
    positive(c.grid_blocks, "grid_blocks");
    positive(c.grid_lr, "grid_lr");
    positive(c.grid_outputs, "grid_outputs");
    for (int e : c.grid_epochs) {
        if (e < 0) throw ConfigError("grid values for 'grid_epochs' must be nonnegative");
    }
    return c;
}

int worker_count() {
    if (const char* env = std::getenv("FRDRL_THREADS"); env != nullptr && *env != '\0') {
        int n = 0;
        const std::string text(env);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
        if (ec == std::errc{} && ptr == text.data() + text.size() && n >= 1) return n;
        throw ConfigError("FRDRL_THREADS must be a positive integer");
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int count = std::clamp(threads, 1, std::max(n, 1));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

CrossValidation cross_validate(const Dataset& data, const TrainConfig& config, int folds, int threads,
                               std::uint64_t stream) {
    data.validate();
    CrossValidation cv;
    cv.plan = stratified_kfold(data, folds, config.seed);
    const auto k = static_cast<std::size_t>(folds);
    cv.accuracy.resize(k);
    cv.macro_f1.resize(k);
    cv.loss.resize(k);
    std::vector<Model> models(k);

    parallel_for(folds, threads, [&](int f) {
        const auto idx = static_cast<std::size_t>(f);
        const Fold& fold = cv.plan.folds[idx];
        TrainConfig cfg = config;
        cfg.seed = derive_seed(config.seed, stream, static_cast<std::uint64_t>(f));
        ClassifierFit fit = train_classifier(data.subset(fold.train), cfg);
        const Dataset test = data.subset(fold.test);
        const Labels pred = predict(fit.model, test.X);
        cv.accuracy[idx] = accuracy(pred, test.y);
        cv.macro_f1[idx] = macro_f1(pred, test.y, data.classes);
        cv.loss[idx] = std::move(fit.loss);
        models[idx] = std::move(fit.model);
    });

    cv.best_fold = static_cast<int>(std::max_element(cv.accuracy.begin(), cv.accuracy.end()) - cv.accuracy.begin());
    cv.best_model = std::move(models[static_cast<std::size_t>(cv.best_fold)]);
    return cv;
}

ClusteringRuns cluster_runs(const Dataset& data, const TrainConfig& config, int clusters, int runs, int threads,
                            std::uint64_t stream) {
    ClusteringRuns out;
    const auto r = static_cast<std::size_t>(runs);
    out.nmi.resize(r);
    out.ari.resize(r);
    out.loss.resize(r);
    std::vector<ClustererFit> fits(r);
    std::vector<double> final_loss(r);
    parallel_for(runs, threads, [&](int run) {
        const auto idx = static_cast<std::size_t>(run);
        TrainConfig cfg = config;
        cfg.seed = derive_seed(config.seed, stream, static_cast<std::uint64_t>(run));
        fits[idx] = train_clusterer(data, cfg, clusters);
        out.nmi[idx] = nmi(fits[idx].state.assignment, data.y);
        out.ari[idx] = ari(fits[idx].state.assignment, data.y);
        out.loss[idx] = fits[idx].loss;
        const ClusterState& st = fits[idx].state;
        final_loss[idx] = clustering_loss(transform(fits[idx].model, data.X), st.centers, st.assignment);
    });
    // Labels only score the runs; the kept run is the one with the lowest final loss.
    out.best_run =
        static_cast<int>(std::min_element(final_loss.begin(), final_loss.end()) - final_loss.begin());
    out.best = std::move(fits[static_cast<std::size_t>(out.best_run)]);
    return out;
}

std::vector<GridCell> run_grid(const Dataset& data, const ExperimentConfig& config, int threads) {
    const TrainConfig& base = config.train;
    auto or_base = [](const auto& list, auto fallback) {
        using T = decltype(fallback);
        return list.empty() ? std::vector<T>{fallback} : std::vector<T>(list.begin(), list.end());
    };
    const auto rules = or_base(config.grid_rules, base.rules);
    const auto blocks = or_base(config.grid_blocks, base.blocks);
    const auto lrs = or_base(config.grid_lr, base.lr);
    const auto epochs = or_base(config.grid_epochs, base.epochs);
    const auto outputs = or_base(config.grid_outputs, base.outputs);

    std::vector<GridCell> cells;
    for (int h : rules)
        for (int k : blocks)
            for (double lr : lrs)
                for (int t : epochs)
                    for (int m : outputs) cells.push_back({h, k, lr, t, m});

    // Cells run one after another; folds/runs inside a cell use the worker pool.
    for (std::size_t i = 0; i < cells.size(); ++i) {
        GridCell& cell = cells[i];
        TrainConfig cfg = base;
        cfg.rules = cell.rules;
        cfg.blocks = cell.blocks;
        cfg.lr = cell.lr;
        cfg.epochs = cell.epochs;
        cfg.outputs = cell.outputs;
        try {
            if (config.task == Task::classification) {
                const CrossValidation cv = cross_validate(data, cfg, config.folds, threads, i + 1);
                const MetricReport acc = summarize("ACC", cv.accuracy);
                cell.score_mean = acc.mean;
                cell.score_std = acc.std;
                cell.secondary_mean = summarize("mF1", cv.macro_f1).mean;
            } else {
                const ClusteringRuns runs = cluster_runs(data, cfg, config.clusters, config.runs, threads, i + 1);
                const MetricReport n = summarize("NMI", runs.nmi);
                cell.score_mean = n.mean;
                cell.score_std = n.std;
                cell.secondary_mean = summarize("ARI", runs.ari).mean;
            }
        } catch (const DivergenceError& e) {
            cell.diverged = true;
            std::cerr << "warning: grid cell " << i + 1 << " diverged: " << e.what() << '\n';
        }
    }
    std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
        if (a.diverged != b.diverged) return !a.diverged;
        return !a.diverged && a.score_mean > b.score_mean;
    });
    return cells;
}

std::string grid_csv(const std::vector<GridCell>& cells, Task task) {
    std::ostringstream out;
    const bool cls = task == Task::classification;
    out << "rank,rules,blocks,lr,epochs,outputs," << (cls ? "acc_mean,acc_std,mf1_mean" : "nmi_mean,nmi_std,ari_mean")
        << ",status\n";
    int rank = 0;
    for (const auto& c : cells) {
        char lr[32];
        std::snprintf(lr, sizeof lr, "%g", c.lr);
        out << (c.diverged ? std::string() : std::to_string(++rank)) << ',' << c.rules << ',' << c.blocks << ','
            << lr << ',' << c.epochs << ',' << c.outputs << ',';
        if (c.diverged) {
            out << ",,,diverged\n";
        } else {
            out << format_real(c.score_mean) << ',' << format_real(c.score_std) << ','
                << format_real(c.secondary_mean) << ",ok\n";
        }
    }
    return out.str();
}

int cmd_classify(const ExperimentConfig& config) {
    return run_guarded([&] {
        const Dataset data = load_for(config);
        std::filesystem::create_directories(config.out);
        const CrossValidation cv = cross_validate(data, config.train, config.folds, worker_count());

        write_text(config.out / "metrics.csv",
                   metrics_csv({summarize("ACC", cv.accuracy), summarize("mF1", cv.macro_f1)}));
        save_model(cv.best_model, config.out / "model.json");
        write_text(config.out / "loss.csv", loss_csv(cv.loss, "fold"));
        if (config.dump_graph) {
            const Dataset train = data.subset(cv.plan.folds[static_cast<std::size_t>(cv.best_fold)].train);
            write_text(config.out / "similarity.csv", matrix_csv(prepare(train.X, cv.best_model.config).geometry.S));
        }
        const MetricReport acc = summarize("ACC", cv.accuracy);
        const MetricReport f1 = summarize("mF1", cv.macro_f1);
        std::cout << "ACC " << format_real(acc.mean) << " +- " << format_real(acc.std) << ", mF1 "
                  << format_real(f1.mean) << " +- " << format_real(f1.std) << '\n';
        return 0;
    });
}

int cmd_cluster(const ExperimentConfig& config) {
    return run_guarded([&] {
        const Dataset data = load_for(config);
        std::filesystem::create_directories(config.out);
        const ClusteringRuns runs = cluster_runs(data, config.train, config.clusters, config.runs, worker_count());

        write_text(config.out / "metrics.csv", metrics_csv({summarize("NMI", runs.nmi), summarize("ARI", runs.ari)}, "run"));
        std::ostringstream partition;
        partition << "index,cluster,label\n";
        const auto& assignment = runs.best.state.assignment;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            partition << i << ',' << assignment[i] << ',' << data.class_names[static_cast<std::size_t>(data.y[i])] << '\n';
        }
        write_text(config.out / "partition.csv", partition.str());
        save_model(runs.best.model, config.out / "model.json");
        write_text(config.out / "loss.csv", loss_csv(runs.loss, "run"));
        if (config.dump_graph) {
            write_text(config.out / "similarity.csv", matrix_csv(prepare(data.X, runs.best.model.config).geometry.S));
        }
        const MetricReport n = summarize("NMI", runs.nmi);
        const MetricReport a = summarize("ARI", runs.ari);
        std::cout << "NMI " << format_real(n.mean) << " +- " << format_real(n.std) << ", ARI " << format_real(a.mean)
                  << " +- " << format_real(a.std) << '\n';
        return 0;
    });
}

int cmd_grid(const ExperimentConfig& config) {
    return run_guarded([&] {
        if (!config.has_grid()) throw ConfigError("grid needs at least one grid_* list");
        const Dataset data = load_for(config);
        std::filesystem::create_directories(config.out);
        const auto cells = run_grid(data, config, worker_count());
        write_text(config.out / "grid.csv", grid_csv(cells, config.task));
        if (!cells.empty() && !cells.front().diverged) {
            const auto& best = cells.front();
            std::cout << "best: rules=" << best.rules << " blocks=" << best.blocks << " lr=" << best.lr
                      << " epochs=" << best.epochs << " outputs=" << best.outputs << " score "
                      << format_real(best.score_mean) << '\n';
        }
        return 0;
    });
}

int cmd_export_rules(const std::filesystem::path& model_path, const std::optional<std::filesystem::path>& data_path,
                     const std::filesystem::path& out_dir) {
    return run_guarded([&] {
        const Model model = load_model(model_path);
        std::vector<std::string> names = model.feature_names;
        if (data_path) {
            const Dataset schema = load_csv(*data_path);
            if (schema.features() != model.antecedent.features()) {
                throw DataError("data has " + std::to_string(schema.features()) + " features, model expects " +
                                std::to_string(model.antecedent.features()));
            }
            names = schema.feature_names;
        }
        std::filesystem::create_directories(out_dir);
        write_text(out_dir / "rules.txt", render_rulebase(model, names));
        write_text(out_dir / "rules.md", render_rule_table(model, names));
        return 0;
    });
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace frdrl
