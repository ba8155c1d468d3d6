#include "frdrl/dataset.hpp"

#include "frdrl/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string_view>

namespace frdrl {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool parse_real(std::string_view cell, double& out) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

Dataset Dataset::subset(const std::vector<int>& indices) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
    out.y.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        out.X.row(static_cast<Eigen::Index>(r)) = X.row(indices[r]);
        out.y.push_back(y[static_cast<std::size_t>(indices[r])]);
    }
    out.classes = classes;
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

void Dataset::validate() const {
    if (X.rows() < 1) throw DataError("dataset has no rows");
    if (X.cols() < 1) throw DataError("dataset has fewer than 1 feature");
    if (classes < 2) throw DataError("dataset has fewer than 2 distinct labels");
    if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
        throw DataError("label count does not match row count");
    }
    for (int label : y) {
        if (label < 0 || label >= classes) throw DataError("label out of range");
    }
}

Dataset parse_csv(const std::string& text, const std::string& source) {
    std::vector<std::string_view> lines;
    {
        std::string_view rest(text);
        while (!rest.empty()) {
            const auto nl = rest.find('\n');
            auto line = rest.substr(0, nl);
            if (!trim(line).empty()) lines.push_back(line);
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
    }
    if (lines.empty()) throw DataError(source + ": empty file");

    const auto header = split_row(lines.front());
    if (header.size() < 2) throw DataError(source + ": fewer than 1 feature column");
    const std::size_t d = header.size() - 1;
    const std::size_t n = lines.size() - 1;
    if (n == 0) throw DataError(source + ": no data rows");

    Dataset data;
    for (std::size_t j = 0; j < d; ++j) data.feature_names.emplace_back(header[j]);
    data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    data.y.reserve(n);

    std::map<std::string, int, std::less<>> label_ids;
    for (std::size_t i = 0; i < n; ++i) {
        const auto cells = split_row(lines[i + 1]);
        const std::size_t line_no = i + 2;
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << source << ": ragged row at line " << line_no << " (" << cells.size()
                << " cells, expected " << header.size() << ")";
            throw DataError(msg.str());
        }
        for (std::size_t j = 0; j < d; ++j) {
            double value = 0.0;
            if (!parse_real(cells[j], value)) {
                std::ostringstream msg;
                msg << source << ": non-numeric feature at line " << line_no << ", column "
                    << j + 1 << " ('" << cells[j] << "')";
                throw DataError(msg.str());
            }
            data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
        }
        const auto label = cells.back();
        auto it = label_ids.find(label);
        if (it == label_ids.end()) {
            it = label_ids.emplace(std::string(label), static_cast<int>(label_ids.size())).first;
            data.class_names.emplace_back(label);
        }
        data.y.push_back(it->second);
    }
    data.classes = static_cast<int>(label_ids.size());
    if (data.classes < 2) throw DataError(source + ": fewer than 2 distinct labels");
    return data;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw DataError("read failure on " + path.string());
    return parse_csv(buffer.str(), path.string());
}

Dataset minmax_normalize(const Dataset& data) {
    Dataset out = data;
    for (Eigen::Index j = 0; j < out.X.cols(); ++j) {
        auto col = out.X.col(j);
        const double lo = col.minCoeff();
        const double hi = col.maxCoeff();
        if (hi > lo) {
            const double span = hi - lo;
            for (Eigen::Index i = 0; i < col.size(); ++i) col(i) = (col(i) - lo) / span;
        } else {
            col.setZero();
        }
    }
    return out;
}

FoldPlan stratified_kfold(const Dataset& data, int k, std::uint64_t seed) {
    const int n = data.rows();
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be at least 2");
    if (k > n) throw std::invalid_argument("stratified_kfold: k exceeds the number of rows");

    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.classes));
    for (int i = 0; i < n; ++i) by_class[static_cast<std::size_t>(data.y[static_cast<std::size_t>(i)])].push_back(i);

    FoldPlan plan;
    plan.seed = seed;
    plan.stratified = std::all_of(by_class.begin(), by_class.end(),
                                  [k](const auto& members) { return std::ssize(members) >= k; });

    Rng rng(seed);
    std::vector<int> fold_of(static_cast<std::size_t>(n), 0);
    if (plan.stratified) {
        // Deal each shuffled class round-robin, carrying the fold cursor across
        // classes so that fold sizes differ by at most one.
        int cursor = 0;
        for (auto& members : by_class) {
            rng.shuffle(members);
            for (int idx : members) {
                fold_of[static_cast<std::size_t>(idx)] = cursor;
                cursor = (cursor + 1) % k;
            }
        }
    } else {
        std::cerr << "warning: a class has fewer than " << k
                  << " members; using unstratified shuffled k-fold\n";
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        rng.shuffle(order);
        for (int r = 0; r < n; ++r) fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r % k;
    }

    plan.folds.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < k; ++f) {
            auto& fold = plan.folds[static_cast<std::size_t>(f)];
            (fold_of[static_cast<std::size_t>(i)] == f ? fold.test : fold.train).push_back(i);
        }
    }
    return plan;
}

Matrix one_hot(const Labels& y, int classes) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(y.size()), classes);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= classes) throw std::invalid_argument("one_hot: label out of range");
        out(static_cast<Eigen::Index>(i), y[i]) = 1.0;
    }
    return out;
}

}  // namespace frdrl
