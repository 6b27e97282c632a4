#include "ktvgl/tensor.hpp"

#include <cstdio>
#include <cstdlib>

namespace ktvgl {

std::string format_double(double v) {
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::int64_t shape_size(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor shape entries must be positive");
    n *= d;
  }
  return n;
}

DenseTensor::DenseTensor(std::vector<int> shape) : shape_(std::move(shape)) {
  values_.assign(static_cast<std::size_t>(shape_size(shape_)), 0.0);
}

DenseTensor::DenseTensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (static_cast<std::int64_t>(values_.size()) != shape_size(shape_)) {
    throw std::invalid_argument("tensor value count does not match shape");
  }
}

std::int64_t DenseTensor::linear_index(std::span<const int> idx) const {
  if (idx.size() != shape_.size()) throw std::invalid_argument("index order mismatch");
  std::int64_t linear = 0;
  for (std::size_t m = 0; m < shape_.size(); ++m) {
    if (idx[m] < 0 || idx[m] >= shape_[m]) throw std::invalid_argument("tensor index out of range");
    linear = linear * shape_[m] + idx[m];
  }
  return linear;
}

double DenseTensor::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

bool DenseTensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

TensorSeries::TensorSeries(std::vector<int> shape, std::vector<std::vector<DenseTensor>> samples)
    : shape_(std::move(shape)), samples_(std::move(samples)) {
  shape_size(shape_);  // validates positivity
  if (samples_.empty()) throw std::invalid_argument("series needs at least one time step");
  for (const auto& step : samples_) {
    if (step.empty()) throw std::invalid_argument("every time step needs at least one sample");
    for (const auto& sample : step) {
      if (sample.shape() != shape_) throw std::invalid_argument("sample shape mismatch");
      if (!sample.all_finite()) throw DataError("series contains non-finite values");
    }
  }
}

std::int64_t TensorSeries::dim_product() const { return shape_size(shape_); }

std::int64_t TensorSeries::dim_product_excluding(int mode) const {
  if (mode < 0 || mode >= order()) throw std::invalid_argument("mode out of range");
  return dim_product() / shape_[static_cast<std::size_t>(mode)];
}

namespace {

// Strides for iterating a canonical-order tensor with one mode pinned:
// outer = product of dims before the mode, inner = product of dims after.
struct ModeSplit {
  std::int64_t outer;
  std::int64_t inner;
  int dim;
};

ModeSplit split_at_mode(const std::vector<int>& shape, int mode) {
  if (mode < 0 || mode >= static_cast<int>(shape.size())) {
    throw std::invalid_argument("mode out of range");
  }
  ModeSplit s{1, 1, shape[static_cast<std::size_t>(mode)]};
  for (int l = 0; l < mode; ++l) s.outer *= shape[static_cast<std::size_t>(l)];
  for (int l = mode + 1; l < static_cast<int>(shape.size()); ++l) {
    s.inner *= shape[static_cast<std::size_t>(l)];
  }
  return s;
}

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutableRowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

Matrix unfold(const DenseTensor& x, int mode) {
  const ModeSplit s = split_at_mode(x.shape(), mode);
  Matrix out(s.dim, s.outer * s.inner);
  const double* values = x.data();
  for (std::int64_t o = 0; o < s.outer; ++o) {
    for (int i = 0; i < s.dim; ++i) {
      const double* src = values + (o * s.dim + i) * s.inner;
      for (std::int64_t k = 0; k < s.inner; ++k) out(i, o * s.inner + k) = src[k];
    }
  }
  return out;
}

DenseTensor fold(const Matrix& unfolded, int mode, const std::vector<int>& shape) {
  const ModeSplit s = split_at_mode(shape, mode);
  if (unfolded.rows() != s.dim || unfolded.cols() != s.outer * s.inner) {
    throw std::invalid_argument("unfolded matrix does not match target shape");
  }
  DenseTensor out(shape);
  double* values = out.data();
  for (std::int64_t o = 0; o < s.outer; ++o) {
    for (int i = 0; i < s.dim; ++i) {
      double* dst = values + (o * s.dim + i) * s.inner;
      for (std::int64_t k = 0; k < s.inner; ++k) dst[k] = unfolded(i, o * s.inner + k);
    }
  }
  return out;
}

DenseTensor mode_product(const DenseTensor& x, const Matrix& mat, int mode) {
  const ModeSplit s = split_at_mode(x.shape(), mode);
  if (mat.rows() != s.dim || mat.cols() != s.dim) {
    throw std::invalid_argument("mode-product matrix must be square with the mode dimension");
  }
  DenseTensor out(x.shape());
  // Each outer block is a contiguous (dim x inner) row-major slice.
  for (std::int64_t o = 0; o < s.outer; ++o) {
    RowMajorMap src(x.data() + o * s.dim * s.inner, s.dim, s.inner);
    MutableRowMajorMap dst(out.data() + o * s.dim * s.inner, s.dim, s.inner);
    dst.noalias() = mat * src;
  }
  return out;
}

DenseTensor mode_product_all_except(const DenseTensor& x, const std::vector<Matrix>& mats, int skip) {
  if (static_cast<int>(mats.size()) != x.order()) {
    throw std::invalid_argument("need one matrix per mode");
  }
  if (skip < 0 || skip >= x.order()) throw std::invalid_argument("skip mode out of range");
  DenseTensor result = x;
  for (int l = 0; l < x.order(); ++l) {
    if (l == skip) continue;
    result = mode_product(result, mats[static_cast<std::size_t>(l)], l);
  }
  return result;
}

Matrix kron_list(const std::vector<Matrix>& mats, std::int64_t cap) {
  if (mats.empty()) throw std::invalid_argument("kron_list needs at least one factor");
  std::int64_t dim = 1;
  for (const Matrix& m : mats) {
    if (m.rows() != m.cols()) throw std::invalid_argument("kron_list factors must be square");
    dim *= m.rows();
    if (dim > cap) {
      throw std::invalid_argument("kron_list result dimension " + std::to_string(dim) +
                                  " exceeds cap " + std::to_string(cap));
    }
  }
  Matrix out = mats.front();
  for (std::size_t f = 1; f < mats.size(); ++f) {
    const Matrix& b = mats[f];
    Matrix next(out.rows() * b.rows(), out.cols() * b.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = out(i, j) * b;
      }
    }
    out = std::move(next);
  }
  return out;
}

TensorSeries flatten_series(const TensorSeries& x) {
  const std::vector<int> flat_shape{static_cast<int>(x.dim_product())};
  std::vector<std::vector<DenseTensor>> samples;
  samples.reserve(static_cast<std::size_t>(x.num_steps()));
  for (const auto& step : x.samples()) {
    std::vector<DenseTensor> flat_step;
    flat_step.reserve(step.size());
    for (const auto& sample : step) {
      flat_step.emplace_back(flat_shape, sample.values());
    }
    samples.push_back(std::move(flat_step));
  }
  return TensorSeries(flat_shape, std::move(samples));
}

}  // namespace ktvgl
