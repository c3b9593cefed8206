// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pgdham {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Raised for precondition violations on user-supplied values.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical stage cannot produce a result (singular operator,
/// non-convergence, collapsed mode, ...). The message names the stage.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mode collapse: the projected enrichment has no component outside the
/// current basis. Greedy loops catch this one and stop early.
class ModeCollapse : public SolverError {
public:
    using SolverError::SolverError;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

} // namespace detail
} // namespace pgdham
