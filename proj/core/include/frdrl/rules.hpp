#pragma once

#include "frdrl/common.hpp"
#include "frdrl/model.hpp"

#include <string>
#include <vector>

namespace frdrl {

/// Linguistic label of every (rule, feature) from the rank of its center among
/// the rules: Low/High for two rules, Low/Medium/High for three, Level-r otherwise.
/// Equal centers share the lower rank.
std::vector<std::vector<std::string>> linguistic_terms(const Matrix& centers);

struct Rule {
    std::vector<std::string> terms;  // one per feature
    Matrix coefficients;  // m x (d+1): intercept then one slope per feature
};

/// Rule h, output l takes column l of the consequent restricted to block h.
std::vector<Rule> extract_rules(const Model& model);

/// IF/THEN listing, one block per rule, coefficients to 3 decimals.
std::string render_rulebase(const Model& model, const std::vector<std::string>& feature_names = {});

/// Same content as a Markdown table, one row per (rule, output).
std::string render_rule_table(const Model& model, const std::vector<std::string>& feature_names = {});

/// Reads the THEN lines of render_rulebase output back into one m x (d+1)
/// matrix per rule. Throws DataError on text it does not recognize.
std::vector<Matrix> parse_rule_coefficients(const std::string& text);

}  // namespace frdrl
