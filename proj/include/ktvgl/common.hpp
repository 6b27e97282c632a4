#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ktvgl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One matrix per time step (precision or covariance path).
using MatrixPath = std::vector<Matrix>;

// Raised when input data is malformed (bad files, shape mismatches,
// non-finite values). Contract violations use std::invalid_argument.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Sum of |m_ij| over i != j.
inline double offdiag_l1_norm(const Matrix& m) {
  return m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum();
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace ktvgl
