#include "frdrl/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace frdrl {

using nlohmann::json;

std::string to_string(Task task) {
    return task == Task::classification ? "classification" : "clustering";
}

std::string to_string(GraphSpace space) {
    return space == GraphSpace::fuzzy ? "fuzzy" : "original";
}

void TrainConfig::validate() const {
    auto require = [](bool ok, const char* field, const char* rule) {
        if (!ok) throw ConfigError(std::string(field) + " " + rule);
    };
    require(rules >= 1, "rules", "must be at least 1");
    require(blocks >= 1, "blocks", "must be at least 1");
    require(outputs >= 0, "outputs", "must be nonnegative");
    require(alpha >= 0.0, "alpha", "must be nonnegative");
    require(beta >= 0.0, "beta", "must be nonnegative");
    require(lr > 0.0, "lr", "must be positive");
    require(epochs >= 0, "epochs", "must be nonnegative");
    require(knn >= 1, "knn", "must be at least 1");
    require(!bandwidth || *bandwidth > 0.0, "bandwidth", "must be positive or auto");
    require(fuzzifier > 1.0, "fuzzifier", "must exceed 1");
    require(fcm_tol > 0.0, "fcm_tol", "must be positive");
    require(fcm_max_iter >= 1, "fcm_max_iter", "must be at least 1");
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw DataError(std::string("model: ") + what + " is not a matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw DataError(std::string("model: ragged matrix ") + what);
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

json config_to_json(const TrainConfig& c) {
    return json{{"rules", c.rules},
                {"blocks", c.blocks},
                {"outputs", c.outputs},
                {"alpha", c.alpha},
                {"beta", c.beta},
                {"lr", c.lr},
                {"epochs", c.epochs},
                {"knn", c.knn},
                {"bandwidth", c.bandwidth ? json(*c.bandwidth) : json("auto")},
                {"seed", c.seed},
                {"fuzzifier", c.fuzzifier},
                {"fcm_tol", c.fcm_tol},
                {"fcm_max_iter", c.fcm_max_iter},
                {"graph_space", to_string(c.graph_space)},
                {"per_block_threshold", c.per_block_threshold}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.rules = j.at("rules").get<int>();
    c.blocks = j.at("blocks").get<int>();
    c.outputs = j.at("outputs").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.lr = j.at("lr").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.knn = j.at("knn").get<int>();
    if (const auto& bw = j.at("bandwidth"); bw.is_number()) c.bandwidth = bw.get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.fuzzifier = j.at("fuzzifier").get<double>();
    c.fcm_tol = j.at("fcm_tol").get<double>();
    c.fcm_max_iter = j.at("fcm_max_iter").get<int>();
    c.graph_space = j.at("graph_space").get<std::string>() == "original" ? GraphSpace::original : GraphSpace::fuzzy;
    c.per_block_threshold = j.at("per_block_threshold").get<bool>();
    return c;
}

}  // namespace

std::string serialize_model(const Model& model) {
    json layers = json::array();
    for (const auto& G : model.stack.layers) layers.push_back(matrix_to_json(G));
    const json doc{
        {"format", kModelFormat},
        {"version", kModelVersion},
        {"task", to_string(model.task)},
        {"config", config_to_json(model.config)},
        {"feature_names", model.feature_names},
        {"class_names", model.class_names},
        {"antecedent",
         {{"rules", model.antecedent.rules()},
          {"features", model.antecedent.features()},
          {"centers", matrix_to_json(model.antecedent.centers())},
          {"widths", matrix_to_json(model.antecedent.widths())}}},
        {"stack",
         {{"blocks", model.stack.blocks()},
          {"outputs", model.stack.outputs()},
          {"thresholds", model.stack.thresholds},
          {"initial", matrix_to_json(model.stack.initial)},
          {"layers", std::move(layers)}}},
        {"consequent", matrix_to_json(model.consequent)},
    };
    return doc.dump(1) + "\n";
}

Model deserialize_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model: not a valid document: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kModelFormat) throw DataError("model: unknown format id");
        if (doc.at("version").get<int>() != kModelVersion) throw DataError("model: unsupported version");

        Model model;
        const auto task = doc.at("task").get<std::string>();
        if (task != "classification" && task != "clustering") throw DataError("model: unknown task " + task);
        model.task = task == "classification" ? Task::classification : Task::clustering;
        model.config = config_from_json(doc.at("config"));
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        model.class_names = doc.at("class_names").get<std::vector<std::string>>();

        const auto& ant = doc.at("antecedent");
        model.antecedent = FuzzyAntecedent(matrix_from_json(ant.at("centers"), "centers"),
                                           matrix_from_json(ant.at("widths"), "widths"));
        if (model.antecedent.rules() != ant.at("rules").get<int>() ||
            model.antecedent.features() != ant.at("features").get<int>()) {
            throw DataError("model: antecedent dimensions disagree with its matrices");
        }

        const auto& st = doc.at("stack");
        model.stack.thresholds = st.at("thresholds").get<std::vector<double>>();
        model.stack.initial = matrix_from_json(st.at("initial"), "initial");
        for (const auto& layer : st.at("layers")) model.stack.layers.push_back(matrix_from_json(layer, "layer"));
        model.consequent = matrix_from_json(doc.at("consequent"), "consequent");

        const int dg = model.antecedent.mapped_dimension();
        const bool shapes_ok =
            model.stack.blocks() == st.at("blocks").get<int>() && model.stack.blocks() >= 1 &&
            model.stack.outputs() == st.at("outputs").get<int>() && model.stack.dimension() == dg &&
            (model.stack.thresholds.size() == 1 ||
             model.stack.thresholds.size() == model.stack.layers.size()) &&
            model.consequent.rows() == dg && model.consequent.cols() == model.stack.outputs() &&
            std::all_of(model.stack.layers.begin(), model.stack.layers.end(),
                        [dg](const Matrix& G) { return G.rows() == dg && G.cols() == dg; });
        if (!shapes_ok) throw DataError("model: inconsistent matrix shapes");
        if (model.feature_names.size() != static_cast<std::size_t>(model.antecedent.features())) {
            throw DataError("model: feature name count mismatch");
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model: ") + e.what());
    }
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << serialize_model(model);
    if (!out) throw DataError("write failure on " + path.string());
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize_model(buffer.str());
}

}  // namespace frdrl
