#pragma once

#include "ktvgl/common.hpp"

#include <string>
#include <vector>

namespace ktvgl {

// Weighted-graph snapshot of one precision matrix. Edge (i, j) is emitted
// when the partial correlation -theta_ij / sqrt(theta_ii * theta_jj) exceeds
// the threshold in magnitude; the signed partial correlation is the edge
// attribute. Node labels default to the row index.
struct ExportOptions {
  enum class Format { kDot, kJson };
  double threshold = 0.01;
  Format format = Format::kDot;
  std::string name = "network";
};

std::string export_network(const Matrix& theta, const std::vector<std::string>& node_labels,
                           const ExportOptions& options);

// Signed partial correlation matrix of a precision matrix (unit diagonal).
Matrix partial_correlations(const Matrix& theta);

}  // namespace ktvgl
