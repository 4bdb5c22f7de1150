#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gist {

using Index = Eigen::Index;

template <typename Scalar>
using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Thrown when input dimensions or configuration values are inconsistent.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a restricted linear system cannot be solved reliably.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when an iterative solver produces non-finite iterates.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
bool all_finite(const Vec<Scalar>& v) {
  return v.allFinite();
}

}  // namespace gist
