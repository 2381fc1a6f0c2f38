#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mdrk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a caller violates an operation's preconditions
/// (bad parameters, mismatched dimensions, unknown names).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a model lacks an operator that the requested strategy needs.
class MissingCapability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mdrk
