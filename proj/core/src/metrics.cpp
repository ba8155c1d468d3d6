#include "frdrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace frdrl {

namespace {

void check_pair(const Labels& a, const Labels& b, const char* who) {
    if (a.empty() || b.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
    if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": length mismatch");
}

struct Contingency {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows;
    std::map<int, double> cols;
    double n = 0.0;
};

Contingency contingency(const Labels& a, const Labels& b) {
    Contingency t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        t.joint[{a[i], b[i]}] += 1.0;
        t.rows[a[i]] += 1.0;
        t.cols[b[i]] += 1.0;
    }
    t.n = static_cast<double>(a.size());
    return t;
}

// Terms are summed in sorted order so relabeling or swapping arguments cannot change the result.
double ordered_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    return total;
}

double entropy(const std::map<int, double>& counts, double n) {
    std::vector<double> terms;
    for (const auto& [label, count] : counts) {
        const double p = count / n;
        terms.push_back(-p * std::log(p));
    }
    return ordered_sum(std::move(terms));
}

double pairs(double count) { return count * (count - 1.0) / 2.0; }

}  // namespace

double accuracy(const Labels& pred, const Labels& truth) {
    check_pair(pred, truth, "accuracy");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double macro_f1(const Labels& pred, const Labels& truth, int classes) {
    check_pair(pred, truth, "macro_f1");
    if (classes < 1) throw std::invalid_argument("macro_f1: class count must be positive");
    std::vector<double> tp(static_cast<std::size_t>(classes)), fp(tp), fn(tp);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred[i];
        const int t = truth[i];
        if (p < 0 || p >= classes || t < 0 || t >= classes) throw std::invalid_argument("macro_f1: label out of range");
        if (p == t) {
            tp[static_cast<std::size_t>(p)] += 1.0;
        } else {
            fp[static_cast<std::size_t>(p)] += 1.0;
            fn[static_cast<std::size_t>(t)] += 1.0;
        }
    }
    std::vector<double> f1;
    for (std::size_t c = 0; c < tp.size(); ++c) {
        const double precision = tp[c] + fp[c] > 0.0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
        const double recall = tp[c] + fn[c] > 0.0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
        f1.push_back(precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0);
    }
    return ordered_sum(std::move(f1)) / classes;
}

double nmi(const Labels& a, const Labels& b) {
    check_pair(a, b, "nmi");
    const Contingency t = contingency(a, b);
    const double ha = entropy(t.rows, t.n);
    const double hb = entropy(t.cols, t.n);
    if (t.rows.size() == 1 && t.cols.size() == 1) return 1.0;
    if (ha == 0.0 || hb == 0.0) return 0.0;
    std::vector<double> terms;
    for (const auto& [cell, count] : t.joint) {
        const double pij = count / t.n;
        terms.push_back(pij * std::log(count * t.n / (t.rows.at(cell.first) * t.cols.at(cell.second))));
    }
    const double mi = ordered_sum(std::move(terms));
    return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double ari(const Labels& a, const Labels& b) {
    check_pair(a, b, "ari");
    const Contingency t = contingency(a, b);
    double index = 0.0;
    for (const auto& [cell, count] : t.joint) index += pairs(count);
    double row_pairs = 0.0;
    for (const auto& [label, count] : t.rows) row_pairs += pairs(count);
    double col_pairs = 0.0;
    for (const auto& [label, count] : t.cols) col_pairs += pairs(count);
    const double total = pairs(t.n);
    const double expected = total > 0.0 ? row_pairs * col_pairs / total : 0.0;
    const double max_index = 0.5 * (row_pairs + col_pairs);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

MetricReport summarize(std::string name, std::vector<double> per_fold) {
    if (per_fold.empty()) throw std::invalid_argument("summarize: no values");
    MetricReport r;
    r.name = std::move(name);
    const double n = static_cast<double>(per_fold.size());
    r.mean = std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : per_fold) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / n);
    r.per_fold = std::move(per_fold);
    return r;
}

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    std::string s(buf);
    if (s == "-0.000000") s.erase(0, 1);
    return s;
}

std::string metrics_csv(const std::vector<MetricReport>& reports, const std::string& column) {
    std::ostringstream out;
    const std::size_t folds = reports.empty() ? 0 : reports.front().per_fold.size();
    out << "name,mean,std";
    for (std::size_t f = 0; f < folds; ++f) out << ',' << column << f + 1;
    out << '\n';
    for (const auto& r : reports) {
        if (r.per_fold.size() != folds) throw std::invalid_argument("metrics_csv: fold count differs between reports");
        out << r.name << ',' << format_real(r.mean) << ',' << format_real(r.std);
        for (double v : r.per_fold) out << ',' << format_real(v);
        out << '\n';
    }
    return out.str();
}

}  // namespace frdrl
