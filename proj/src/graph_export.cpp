#include "ktvgl/graph_export.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace ktvgl {

Matrix partial_correlations(const Matrix& theta) {
  if (theta.rows() != theta.cols()) throw std::invalid_argument("precision matrix must be square");
  const Eigen::Index d = theta.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (theta(i, i) <= 0.0) throw DataError("precision matrix has a nonpositive diagonal entry");
  }
  Matrix pc = Matrix::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j) pc(i, j) = -theta(i, j) / std::sqrt(theta(i, i) * theta(j, j));
    }
  }
  return pc;
}

std::string export_network(const Matrix& theta, const std::vector<std::string>& node_labels,
                           const ExportOptions& options) {
  const Matrix pc = partial_correlations(theta);
  const Eigen::Index d = theta.rows();
  if (!node_labels.empty() && static_cast<Eigen::Index>(node_labels.size()) != d) {
    throw std::invalid_argument("node label count mismatch");
  }
  auto label = [&](Eigen::Index i) {
    return node_labels.empty() ? std::to_string(i) : node_labels[static_cast<std::size_t>(i)];
  };

  if (options.format == ExportOptions::Format::kJson) {
    nlohmann::json j;
    j["name"] = options.name;
    j["threshold"] = options.threshold;
    nlohmann::json nodes = nlohmann::json::array();
    for (Eigen::Index i = 0; i < d; ++i) nodes.push_back({{"id", i}, {"label", label(i)}});
    nlohmann::json edges = nlohmann::json::array();
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j2 = i + 1; j2 < d; ++j2) {
        if (std::abs(pc(i, j2)) > options.threshold) {
          edges.push_back({{"source", i}, {"target", j2}, {"partial_correlation", pc(i, j2)}});
        }
      }
    }
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    return j.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "graph \"" << options.name << "\" {\n";
  for (Eigen::Index i = 0; i < d; ++i) {
    out << "  " << i << " [label=\"" << label(i) << "\"];\n";
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (std::abs(pc(i, j)) > options.threshold) {
        out << "  " << i << " -- " << j << " [weight=" << format_double(pc(i, j)) << "];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace ktvgl
