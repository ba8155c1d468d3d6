#pragma once

#include "frdrl/common.hpp"

#include <string>
#include <vector>

namespace frdrl {

// All metrics throw std::invalid_argument on empty or length-mismatched input.

double accuracy(const Labels& pred, const Labels& truth);

/// Unweighted mean over all `classes` of per-class F1; a class with
/// precision + recall = 0 (including one absent everywhere) scores 0.
double macro_f1(const Labels& pred, const Labels& truth, int classes);

/// Mutual information over sqrt(H(a) H(b)), natural log. Two single-cluster
/// partitions score 1; a single cluster against anything else scores 0.
double nmi(const Labels& a, const Labels& b);

/// Adjusted Rand index; 1 when the chance-corrected denominator vanishes
/// (both partitions trivial in the same way).
double ari(const Labels& a, const Labels& b);

struct MetricReport {
    std::string name;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over folds
    std::vector<double> per_fold;
};

MetricReport summarize(std::string name, std::vector<double> per_fold);

/// "name,mean,std,<column>1..<column>k" header followed by one row per report.
/// All reports must have the same fold count.
std::string metrics_csv(const std::vector<MetricReport>& reports, const std::string& column = "fold");

/// Fixed-format real used by every CSV writer (%.6f).
std::string format_real(double value);

}  // namespace frdrl
