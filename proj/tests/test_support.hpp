#pragma once

#include "ktvgl/benchmark.hpp"
#include "ktvgl/ktvgl.hpp"
#include "ktvgl/rng.hpp"
#include "ktvgl/tensor.hpp"

#include <vector>

namespace ktvgl::test {

inline DenseTensor random_tensor(const std::vector<int>& shape, Rng& rng) {
  DenseTensor x(shape);
  for (std::int64_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  return x;
}

inline Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline Matrix random_symmetric(int d, Rng& rng) {
  const Matrix m = random_matrix(d, d, rng);
  return 0.5 * (m + m.transpose());
}

// Well-conditioned random SPD matrix.
inline Matrix random_spd(int d, Rng& rng) {
  const Matrix m = random_matrix(d, d, rng);
  return m * m.transpose() / static_cast<double>(d) + Matrix::Identity(d, d) * 0.5;
}

inline TensorSeries random_series(const std::vector<int>& shape, int steps, int samples_per_step, Rng& rng) {
  std::vector<std::vector<DenseTensor>> samples;
  samples.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    std::vector<DenseTensor> step;
    step.reserve(static_cast<std::size_t>(samples_per_step));
    for (int n = 0; n < samples_per_step; ++n) step.push_back(random_tensor(shape, rng));
    samples.push_back(std::move(step));
  }
  return TensorSeries(shape, std::move(samples));
}

inline MultiNetworkPath random_networks(const std::vector<int>& dims, int steps, Rng& rng) {
  MultiNetworkPath nets;
  nets.nets.resize(static_cast<std::size_t>(steps));
  for (auto& step : nets.nets) {
    for (int d : dims) step.push_back(random_spd(d, rng));
  }
  return nets;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({1e-300, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

}  // namespace ktvgl::test
