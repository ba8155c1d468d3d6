#include "frdrl/antecedent.hpp"

#include "frdrl/rng.hpp"

#include <cmath>
#include <numeric>

namespace frdrl {

FuzzyAntecedent::FuzzyAntecedent(Matrix centers, Matrix widths)
    : centers_(std::move(centers)), widths_(std::move(widths)) {
    if (centers_.rows() < 1 || centers_.cols() < 1) {
        throw std::invalid_argument("FuzzyAntecedent: needs at least one rule and one feature");
    }
    if (centers_.rows() != widths_.rows() || centers_.cols() != widths_.cols()) {
        throw std::invalid_argument("FuzzyAntecedent: centers and widths differ in shape");
    }
    if (!(widths_.array() > 0.0).all()) {
        throw std::invalid_argument("FuzzyAntecedent: widths must be positive");
    }
}

FcmResult fcm(const Matrix& X, int clusters, const FcmOptions& options, std::uint64_t seed) {
    const Eigen::Index n = X.rows();
    if (clusters < 1 || clusters > n) throw std::invalid_argument("fcm: cluster count must be in [1, N]");
    if (!(options.fuzzifier > 1.0)) throw std::invalid_argument("fcm: fuzzifier must exceed 1");
    if (!X.allFinite()) throw std::invalid_argument("fcm: non-finite input");

    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(seed);
    rng.shuffle(rows);

    FcmResult result;
    result.centers.resize(clusters, X.cols());
    for (int h = 0; h < clusters; ++h) result.centers.row(h) = X.row(rows[static_cast<std::size_t>(h)]);

    const double m = options.fuzzifier;
    const double exponent = 1.0 / (m - 1.0);
    Matrix& u = result.memberships;
    u.resize(n, clusters);
    Matrix dist2(n, clusters);

    for (int iter = 0; iter < options.max_iter; ++iter) {
        for (int h = 0; h < clusters; ++h) {
            dist2.col(h) = (X.rowwise() - result.centers.row(h)).rowwise().squaredNorm();
        }
        // u_ih = 1 / sum_k (d_ih^2 / d_ik^2)^(1/(m-1)); rows touching a center split mass among the zero distances.
        for (Eigen::Index i = 0; i < n; ++i) {
            int zeros = 0;
            for (int h = 0; h < clusters; ++h) zeros += dist2(i, h) == 0.0 ? 1 : 0;
            if (zeros > 0) {
                for (int h = 0; h < clusters; ++h) u(i, h) = dist2(i, h) == 0.0 ? 1.0 / zeros : 0.0;
                continue;
            }
            for (int h = 0; h < clusters; ++h) {
                double denom = 0.0;
                for (int k = 0; k < clusters; ++k) denom += std::pow(dist2(i, h) / dist2(i, k), exponent);
                u(i, h) = 1.0 / denom;
            }
        }

        const Matrix weights = u.array().pow(m).matrix();
        Matrix next(clusters, X.cols());
        for (int h = 0; h < clusters; ++h) {
            const double mass = weights.col(h).sum();
            next.row(h) = (weights.col(h).transpose() * X) / mass;
        }
        const double shift = (next - result.centers).rowwise().norm().maxCoeff();
        result.centers = std::move(next);
        ++result.iterations;

        double objective = 0.0;
        for (int h = 0; h < clusters; ++h) {
            objective += weights.col(h).dot((X.rowwise() - result.centers.row(h)).rowwise().squaredNorm());
        }
        result.objective.push_back(objective);

        if (shift < options.tol) break;
    }
    return result;
}

Matrix estimate_widths(const Matrix& X, const Matrix& centers) {
    if (X.cols() != centers.cols()) throw std::invalid_argument("estimate_widths: feature count mismatch");
    Matrix spread(centers.rows(), centers.cols());
    for (Eigen::Index h = 0; h < centers.rows(); ++h) {
        spread.row(h) = (X.rowwise() - centers.row(h)).array().square().colwise().sum();
    }
    const RowVector total = spread.colwise().sum();
    Matrix widths(centers.rows(), centers.cols());
    for (Eigen::Index j = 0; j < centers.cols(); ++j) {
        for (Eigen::Index h = 0; h < centers.rows(); ++h) {
            // 0/0 on a constant feature lands on the floor.
            const double q = total(j) > 0.0 ? spread(h, j) / total(j) : 0.0;
            widths(h, j) = std::max(q, kWidthFloor);
        }
    }
    return widths;
}

FuzzyAntecedent fit_antecedent(const Matrix& X, int rules, const CenterEstimator& estimator,
                               std::uint64_t seed) {
    Matrix centers = estimator.centers(X, rules, seed);
    Matrix widths = estimate_widths(X, centers);
    return FuzzyAntecedent(std::move(centers), std::move(widths));
}

double membership(double x, double center, double width) {
    const double diff = x - center;
    return std::exp(-(diff * diff) / (2.0 * width));
}

namespace {

void firing_into(const Eigen::Ref<const RowVector>& x, const FuzzyAntecedent& a,
                 Eigen::Ref<RowVector> out) {
    const Matrix& e = a.centers();
    const Matrix& q = a.widths();
    double total = 0.0;
    for (int h = 0; h < a.rules(); ++h) {
        double log_mu = 0.0;
        for (int j = 0; j < a.features(); ++j) {
            const double diff = x(j) - e(h, j);
            log_mu -= (diff * diff) / (2.0 * q(h, j));
        }
        out(h) = std::exp(log_mu);
        total += out(h);
    }
    out /= std::max(total, kFiringFloor);
}

}  // namespace

RowVector firing_levels(const Eigen::Ref<const RowVector>& x, const FuzzyAntecedent& antecedent) {
    if (x.size() != antecedent.features()) throw std::invalid_argument("firing_levels: feature count mismatch");
    RowVector out(antecedent.rules());
    firing_into(x, antecedent, out);
    return out;
}

Matrix fuzzy_map(const Matrix& X, const FuzzyAntecedent& antecedent) {
    if (X.cols() != antecedent.features()) throw std::invalid_argument("fuzzy_map: feature count mismatch");
    const int d = antecedent.features();
    const int block = d + 1;
    Matrix out(X.rows(), antecedent.mapped_dimension());
    RowVector level(antecedent.rules());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        firing_into(X.row(i), antecedent, level);
        for (int h = 0; h < antecedent.rules(); ++h) {
            out(i, h * block) = level(h);
            out.block(i, h * block + 1, 1, d) = level(h) * X.row(i);
        }
    }
    return out;
}

}  // namespace frdrl
