#include "frdrl/rules.hpp"

#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

namespace frdrl {

namespace {

constexpr const char* kMinus = "−";
constexpr const char* kTimes = "·";

std::string term_label(int rank, int rules) {
    if (rules == 2) return rank == 0 ? "Low" : "High";
    if (rules == 3) {
        static const char* names[] = {"Low", "Medium", "High"};
        return names[rank];
    }
    return "Level-" + std::to_string(rank + 1);
}

// Magnitude to 3 decimals plus whether a minus sign is due (never for "0.000").
std::pair<bool, std::string> split_sign(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(v));
    std::string mag(buf);
    return {v < 0.0 && mag != "0.000", mag};
}

std::string signed_value(double v) {
    auto [negative, mag] = split_sign(v);
    return negative ? kMinus + mag : mag;
}

std::string affine_expression(const Eigen::Ref<const RowVector>& coef) {
    std::string out = signed_value(coef(0));
    for (Eigen::Index j = 1; j < coef.size(); ++j) {
        auto [negative, mag] = split_sign(coef(j));
        out += negative ? std::string(" ") + kMinus + " " : std::string(" + ");
        out += mag + kTimes + "x" + std::to_string(j);
    }
    return out;
}

double parse_number(std::string s) {
    const std::string minus(kMinus);
    bool negative = false;
    if (s.rfind(minus, 0) == 0) {
        negative = true;
        s.erase(0, minus.size());
    } else if (!s.empty() && s.front() == '-') {
        negative = true;
        s.erase(0, 1);
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DataError("rule base: bad number '" + s + "'");
    }
    if (used != s.size()) throw DataError("rule base: bad number '" + s + "'");
    return negative ? -v : v;
}

}  // namespace

std::vector<std::vector<std::string>> linguistic_terms(const Matrix& centers) {
    const int rules = static_cast<int>(centers.rows());
    std::vector<std::vector<std::string>> out(static_cast<std::size_t>(rules),
                                              std::vector<std::string>(static_cast<std::size_t>(centers.cols())));
    for (Eigen::Index j = 0; j < centers.cols(); ++j) {
        for (int h = 0; h < rules; ++h) {
            int rank = 0;
            for (int other = 0; other < rules; ++other) rank += centers(other, j) < centers(h, j) ? 1 : 0;
            out[static_cast<std::size_t>(h)][static_cast<std::size_t>(j)] = term_label(rank, rules);
        }
    }
    return out;
}

std::vector<Rule> extract_rules(const Model& model) {
    const int d = model.antecedent.features();
    const int block = d + 1;
    const auto terms = linguistic_terms(model.antecedent.centers());
    if (model.consequent.rows() != static_cast<Eigen::Index>(model.antecedent.rules()) * block) {
        throw std::invalid_argument("extract_rules: consequent does not match the antecedent");
    }
    std::vector<Rule> rules;
    for (int h = 0; h < model.antecedent.rules(); ++h) {
        Rule r;
        r.terms = terms[static_cast<std::size_t>(h)];
        r.coefficients = model.consequent.block(h * block, 0, block, model.consequent.cols()).transpose();
        rules.push_back(std::move(r));
    }
    return rules;
}

std::string render_rulebase(const Model& model, const std::vector<std::string>& feature_names) {
    const auto& names = feature_names.empty() ? model.feature_names : feature_names;
    const auto rules = extract_rules(model);
    std::ostringstream out;
    out << "Rule base: " << rules.size() << " rules, " << model.antecedent.features() << " features, "
        << model.consequent.cols() << " outputs\n";
    if (!names.empty()) {
        out << "Features:";
        for (std::size_t j = 0; j < names.size(); ++j) out << (j ? ", x" : " x") << j + 1 << " = " << names[j];
        out << '\n';
    }
    for (std::size_t h = 0; h < rules.size(); ++h) {
        const Rule& r = rules[h];
        out << "Rule " << h + 1 << ":\n";
        out << "IF: ";
        for (std::size_t j = 0; j < r.terms.size(); ++j) {
            out << (j ? " and " : "") << "the " << j + 1 << "th feature is " << r.terms[j];
        }
        out << ".\n";
        for (Eigen::Index l = 0; l < r.coefficients.rows(); ++l) {
            out << (l == 0 ? "Then: " : "  and ") << "the " << l + 1 << "th output is "
                << affine_expression(r.coefficients.row(l)) << '\n';
        }
    }
    return out.str();
}

std::string render_rule_table(const Model& model, const std::vector<std::string>& feature_names) {
    const auto& names = feature_names.empty() ? model.feature_names : feature_names;
    const auto rules = extract_rules(model);
    const int d = model.antecedent.features();
    std::ostringstream out;
    out << "| Rule | IF | Output | Intercept |";
    for (int j = 0; j < d; ++j) out << " x" << j + 1 << " |";
    out << "\n|---|---|---|---|";
    for (int j = 0; j < d; ++j) out << "---|";
    out << '\n';
    for (std::size_t h = 0; h < rules.size(); ++h) {
        const Rule& r = rules[h];
        std::string premise;
        for (std::size_t j = 0; j < r.terms.size(); ++j) {
            const std::string var = j < names.size() ? names[j] : "x" + std::to_string(j + 1);
            premise += (j ? ", " : "") + var + " " + r.terms[j];
        }
        for (Eigen::Index l = 0; l < r.coefficients.rows(); ++l) {
            out << "| " << h + 1 << " | " << (l == 0 ? premise : "") << " | " << l + 1 << " |";
            for (Eigen::Index j = 0; j < r.coefficients.cols(); ++j) out << ' ' << signed_value(r.coefficients(l, j)) << " |";
            out << '\n';
        }
    }
    return out.str();
}

std::vector<Matrix> parse_rule_coefficients(const std::string& text) {
    static const std::regex rule_header(R"(^Rule (\d+):\s*$)");
    static const std::regex then_line(R"(^(?:Then: |  and )the (\d+)th output is (.*)$)");
    const std::string minus(kMinus);
    const std::string times(kTimes);

    std::vector<std::vector<std::vector<double>>> rules;
    std::istringstream in(text);
    std::string line;
    std::smatch match;
    while (std::getline(in, line)) {
        if (std::regex_match(line, match, rule_header)) {
            rules.emplace_back();
            continue;
        }
        if (!std::regex_match(line, match, then_line)) continue;
        if (rules.empty()) throw DataError("rule base: output line before any rule header");
        std::string expr = match[2];
        std::vector<double> coef;
        // Split "a + b·x1 − c·x2" on the separating operators.
        const auto next_op = [&](std::size_t from) {
            const auto plus = expr.find(" + ", from);
            const auto neg = expr.find(" " + minus + " ", from);
            return std::min(plus, neg);
        };
        std::size_t op = next_op(0);
        coef.push_back(parse_number(expr.substr(0, op)));
        std::size_t pos = op;
        while (pos != std::string::npos) {
            const bool negative = expr.compare(pos, 3, " + ") != 0;
            const std::size_t start = pos + (negative ? minus.size() + 2 : 3);
            op = next_op(start);
            std::string termtext = expr.substr(start, op == std::string::npos ? std::string::npos : op - start);
            const auto dot = termtext.find(times);
            if (dot == std::string::npos) throw DataError("rule base: term without a variable: " + termtext);
            const double value = parse_number(termtext.substr(0, dot));
            coef.push_back(negative ? -value : value);
            pos = op;
        }
        rules.back().push_back(std::move(coef));
    }
    if (rules.empty()) throw DataError("rule base: no rules found");

    std::vector<Matrix> out;
    for (const auto& rule : rules) {
        if (rule.empty()) throw DataError("rule base: rule without outputs");
        Matrix m(static_cast<Eigen::Index>(rule.size()), static_cast<Eigen::Index>(rule.front().size()));
        for (std::size_t l = 0; l < rule.size(); ++l) {
            if (rule[l].size() != rule.front().size()) throw DataError("rule base: ragged coefficient lists");
            for (std::size_t j = 0; j < rule[l].size(); ++j) m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = rule[l][j];
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace frdrl
