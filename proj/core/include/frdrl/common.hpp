#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace frdrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Labels = std::vector<int>;

/// Base of every error the library raises on bad input or failed runs.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (unknown key, bad value).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Unreadable, malformed or inconsistent data and model files.
class DataError : public Error {
public:
    using Error::Error;
};

/// A solver state left the finite range (NaN/Inf or blow-up beyond the guard).
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace frdrl
