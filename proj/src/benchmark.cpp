#include "ktvgl/benchmark.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>

namespace ktvgl {

Matrix gen_er_precision(int d, double edge_prob, std::pair<double, double> value_range, Rng& rng) {
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  if (edge_prob < 0.0 || edge_prob > 1.0) throw std::invalid_argument("edge probability must be in [0, 1]");
  if (value_range.second < value_range.first) throw std::invalid_argument("empty value range");

  Matrix theta = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (rng.bernoulli(edge_prob)) {
        const double w = rng.uniform(value_range.first, value_range.second);
        theta(i, j) = w;
        theta(j, i) = w;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(theta, Eigen::EigenvaluesOnly);
  const double c = es.eigenvalues().minCoeff();
  theta.diagonal().array() += 0.1 + std::abs(c);
  return theta;
}

GroundTruth gen_network_path(const std::vector<int>& dims, int T,
                             const std::vector<std::vector<int>>& change_points, double edge_prob,
                             std::pair<double, double> value_range, std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  shape_size(dims);
  if (change_points.size() != dims.size()) throw std::invalid_argument("need one change list per mode");
  for (const auto& cps : change_points) {
    if (!std::is_sorted(cps.begin(), cps.end())) throw std::invalid_argument("change points must be sorted");
    for (std::size_t i = 1; i < cps.size(); ++i) {
      if (cps[i] == cps[i - 1]) throw std::invalid_argument("duplicate change point");
    }
    for (int c : cps) {
      if (c < 1 || c > T - 1) throw std::invalid_argument("change points must lie strictly inside the series");
    }
  }

  GroundTruth truth;
  truth.change_points = change_points;
  truth.seed = seed;
  truth.edge_prob = edge_prob;
  truth.value_range = value_range;

  Rng rng(seed);
  const int modes = static_cast<int>(dims.size());
  std::vector<MatrixPath> per_mode(static_cast<std::size_t>(modes));
  for (int m = 0; m < modes; ++m) {
    const auto& cps = change_points[static_cast<std::size_t>(m)];
    MatrixPath path;
    path.reserve(static_cast<std::size_t>(T));
    std::size_t next_change = 0;
    Matrix current = gen_er_precision(dims[static_cast<std::size_t>(m)], edge_prob, value_range, rng);
    for (int t = 0; t < T; ++t) {
      if (next_change < cps.size() && t == cps[next_change]) {
        current = gen_er_precision(dims[static_cast<std::size_t>(m)], edge_prob, value_range, rng);
        ++next_change;
      }
      path.push_back(current);
    }
    per_mode[static_cast<std::size_t>(m)] = std::move(path);
  }

  truth.networks.nets.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    auto& step = truth.networks.nets[static_cast<std::size_t>(t)];
    step.reserve(static_cast<std::size_t>(modes));
    for (int m = 0; m < modes; ++m) {
      step.push_back(per_mode[static_cast<std::size_t>(m)][static_cast<std::size_t>(t)]);
    }
  }
  return truth;
}

TensorSeries sample_series(const GroundTruth& truth, int samples_per_step, std::uint64_t seed) {
  if (samples_per_step < 1) throw std::invalid_argument("need at least one sample per step");
  const int T = truth.networks.num_steps();
  const int modes = truth.networks.num_modes();
  if (T == 0 || modes == 0) throw std::invalid_argument("empty ground truth");

  std::vector<int> dims;
  dims.reserve(static_cast<std::size_t>(modes));
  for (int m = 0; m < modes; ++m) {
    dims.push_back(static_cast<int>(truth.networks.nets.front()[static_cast<std::size_t>(m)].rows()));
  }

  Rng rng(seed);
  std::vector<std::vector<DenseTensor>> samples(static_cast<std::size_t>(T));
  std::vector<Matrix> whiteners(static_cast<std::size_t>(modes));  // inverse upper Cholesky factors
  for (int t = 0; t < T; ++t) {
    // vec(x) = L^{-T} z with K = (x) L L^T per factor, so each mode applies
    // the inverse transposed Cholesky factor of its precision.
    for (int m = 0; m < modes; ++m) {
      const Matrix& net = truth.networks.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
      Eigen::LLT<Matrix> llt(net);
      if (llt.info() != Eigen::Success) throw DataError("ground-truth network is not positive definite");
      Matrix lt = llt.matrixU();
      whiteners[static_cast<std::size_t>(m)] =
          lt.triangularView<Eigen::Upper>().solve(Matrix::Identity(lt.rows(), lt.cols()));
    }
    auto& step = samples[static_cast<std::size_t>(t)];
    step.reserve(static_cast<std::size_t>(samples_per_step));
    for (int n = 0; n < samples_per_step; ++n) {
      DenseTensor z(dims);
      for (std::int64_t i = 0; i < z.size(); ++i) z[i] = rng.normal();
      DenseTensor x = z;
      for (int m = 0; m < modes; ++m) {
        x = mode_product(x, whiteners[static_cast<std::size_t>(m)], m);
      }
      step.push_back(std::move(x));
    }
  }
  return TensorSeries(dims, std::move(samples));
}

}  // namespace ktvgl
