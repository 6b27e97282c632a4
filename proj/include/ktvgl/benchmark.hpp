#pragma once

#include "ktvgl/ktvgl.hpp"
#include "ktvgl/rng.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ktvgl {

// True networks behind a synthetic series: piecewise-constant per mode, with
// the change points (0-based index of the first step governed by the new
// network) recorded per mode.
struct GroundTruth {
  MultiNetworkPath networks;
  std::vector<std::vector<int>> change_points;
  std::uint64_t seed = 0;
  double edge_prob = 0.25;
  std::pair<double, double> value_range{-3.0, 3.0};
};

// Random sparse precision matrix: undirected Erdos-Renyi support where each
// (i, j) pair carries an edge with probability edge_prob, uniform weights on
// value_range mirrored across the diagonal, then shifted by (0.1 + |c|) I
// where c is the smallest eigenvalue. Smallest eigenvalue of the result is
// at least 0.1.
Matrix gen_er_precision(int d, double edge_prob, std::pair<double, double> value_range, Rng& rng);

// Piecewise-constant network path per mode, resampled at each change point.
GroundTruth gen_network_path(const std::vector<int>& dims, int T,
                             const std::vector<std::vector<int>>& change_points, double edge_prob,
                             std::pair<double, double> value_range, std::uint64_t seed);

// Draws samples_per_step observations per step from the zero-mean Gaussian
// whose precision is the Kronecker product of the true mode networks. Works
// factor-wise through per-mode Cholesky solves; the flattened precision is
// never materialized.
TensorSeries sample_series(const GroundTruth& truth, int samples_per_step, std::uint64_t seed);

}  // namespace ktvgl
