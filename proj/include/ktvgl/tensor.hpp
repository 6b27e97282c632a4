#pragma once

#include "ktvgl/common.hpp"

#include <span>
#include <vector>

namespace ktvgl {

// Largest flattened dimension (product of mode sizes) for which explicit
// Kronecker products may be materialized. Oracle and flattened-baseline
// paths fail loudly above this instead of exhausting memory.
inline constexpr std::int64_t kDefaultKronCap = 4096;

std::int64_t shape_size(const std::vector<int>& shape);

// Dense real tensor in canonical linearization: entry (i_0, ..., i_{M-1})
// lives at linear index i_0*(d_1*...*d_{M-1}) + i_1*(d_2*...*d_{M-1}) + ...
// + i_{M-1}, i.e. mode 0 varies slowest. Kronecker factor lists put mode 0
// outermost so that kron_list(thetas) acts on vec() in this order.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<int> shape);
  DenseTensor(std::vector<int> shape, std::vector<double> values);

  const std::vector<int>& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

  double operator[](std::int64_t linear) const { return values_[static_cast<std::size_t>(linear)]; }
  double& operator[](std::int64_t linear) { return values_[static_cast<std::size_t>(linear)]; }

  std::int64_t linear_index(std::span<const int> idx) const;
  double at(std::span<const int> idx) const { return values_[static_cast<std::size_t>(linear_index(idx))]; }
  double& at(std::span<const int> idx) { return values_[static_cast<std::size_t>(linear_index(idx))]; }

  const std::vector<double>& values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  // Canonical vectorization (a view; no copy).
  Eigen::Map<const Vector> vec() const {
    return Eigen::Map<const Vector>(values_.data(), static_cast<Eigen::Index>(values_.size()));
  }

  double squared_norm() const;
  bool all_finite() const;

 private:
  std::vector<int> shape_;
  std::vector<double> values_;
};

// Observed tensor time series: T steps, each holding n_t >= 1 samples of
// identical shape. Values are validated finite at construction.
class TensorSeries {
 public:
  TensorSeries(std::vector<int> shape, std::vector<std::vector<DenseTensor>> samples);

  const std::vector<int>& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  int num_steps() const { return static_cast<int>(samples_.size()); }
  int num_samples(int t) const { return static_cast<int>(samples_[static_cast<std::size_t>(t)].size()); }
  const DenseTensor& sample(int t, int n) const {
    return samples_[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)];
  }
  const std::vector<std::vector<DenseTensor>>& samples() const { return samples_; }

  std::int64_t dim_product() const;                    // D
  std::int64_t dim_product_excluding(int mode) const;  // D excluding the given mode

 private:
  std::vector<int> shape_;
  std::vector<std::vector<DenseTensor>> samples_;
};

// Mode-m unfolding: d_m x (D excluding m) matrix. Row index is i_m; the
// column enumerates the remaining modes in ascending order with earlier
// modes varying slowest, matching the canonical linearization with mode m
// pulled to the front.
Matrix unfold(const DenseTensor& x, int mode);

// Inverse of unfold for the given target shape.
DenseTensor fold(const Matrix& unfolded, int mode, const std::vector<int>& shape);

// Applies a square matrix along one mode: result = x x_mode mat.
DenseTensor mode_product(const DenseTensor& x, const Matrix& mat, int mode);

// Applies mats[l] along mode l for every l != skip. mats[skip] is ignored.
// Application order does not affect the result.
DenseTensor mode_product_all_except(const DenseTensor& x, const std::vector<Matrix>& mats, int skip);

// Left-to-right Kronecker product. Rejects results whose dimension exceeds
// the cap.
Matrix kron_list(const std::vector<Matrix>& mats, std::int64_t cap = kDefaultKronCap);

// Replaces every sample by its canonical vectorization: M = 1, d_0 = D.
TensorSeries flatten_series(const TensorSeries& x);

}  // namespace ktvgl
