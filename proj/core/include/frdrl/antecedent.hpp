#pragma once

#include "frdrl/common.hpp"

#include <cstdint>
#include <memory>

namespace frdrl {

/// Gaussian IF-part of a TSK rule base: one center and one width per
/// (rule, feature). Widths are variances, membership = exp(-(x-e)^2 / (2q)).
class FuzzyAntecedent {
public:
    FuzzyAntecedent() = default;
    /// Throws std::invalid_argument on shape mismatch, empty input or non-positive widths.
    FuzzyAntecedent(Matrix centers, Matrix widths);

    [[nodiscard]] const Matrix& centers() const { return centers_; }
    [[nodiscard]] const Matrix& widths() const { return widths_; }
    [[nodiscard]] int rules() const { return static_cast<int>(centers_.rows()); }
    [[nodiscard]] int features() const { return static_cast<int>(centers_.cols()); }
    /// Width of the fuzzy feature space, H(d+1).
    [[nodiscard]] int mapped_dimension() const { return rules() * (features() + 1); }

private:
    Matrix centers_;
    Matrix widths_;
};

inline constexpr double kWidthFloor = 1e-8;
inline constexpr double kFiringFloor = 1e-12;

struct FcmOptions {
    double fuzzifier = 2.0;
    double tol = 1e-5;
    int max_iter = 100;
};

struct FcmResult {
    Matrix centers;  // H x d
    Matrix memberships;  // N x H
    // Weighted within-cluster sum after every center update.
    std::vector<double> objective;
    int iterations = 0;
};

/// Standard fuzzy c-means. Centers start at H distinct rows drawn without
/// replacement; stops when the largest center shift drops below tol.
FcmResult fcm(const Matrix& X, int clusters, const FcmOptions& options, std::uint64_t seed);

inline Matrix fcm_cluster(const Matrix& X, int clusters, const FcmOptions& options, std::uint64_t seed) {
    return fcm(X, clusters, options, seed).centers;
}

/// Estimates rule centers from data. FCM is the default; other partitioning
/// schemes plug in here.
class CenterEstimator {
public:
    virtual ~CenterEstimator() = default;
    [[nodiscard]] virtual Matrix centers(const Matrix& X, int rules, std::uint64_t seed) const = 0;
};

class FcmEstimator final : public CenterEstimator {
public:
    explicit FcmEstimator(FcmOptions options = {}) : options_(options) {}
    [[nodiscard]] Matrix centers(const Matrix& X, int rules, std::uint64_t seed) const override {
        return fcm_cluster(X, rules, options_, seed);
    }

private:
    FcmOptions options_;
};

/// Width of rule h on feature j: squared spread of the feature around e_hj,
/// as a share of the spread around all rule centers of that feature. Floored at kWidthFloor.
Matrix estimate_widths(const Matrix& X, const Matrix& centers);

FuzzyAntecedent fit_antecedent(const Matrix& X, int rules, const CenterEstimator& estimator,
                               std::uint64_t seed);

double membership(double x, double center, double width);

/// Normalized firing levels of every rule for one input row. Products of
/// memberships are formed in log space; the normalizer is floored at kFiringFloor.
RowVector firing_levels(const Eigen::Ref<const RowVector>& x, const FuzzyAntecedent& antecedent);

/// Maps N x d data into the N x H(d+1) fuzzy feature space: block h of row i
/// is firing_h(x_i) * [1, x_i].
Matrix fuzzy_map(const Matrix& X, const FuzzyAntecedent& antecedent);

}  // namespace frdrl
