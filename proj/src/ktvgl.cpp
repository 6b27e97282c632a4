#include "ktvgl/ktvgl.hpp"

#include <cmath>
#include <string>

namespace ktvgl {

namespace {

void validate_networks(const TensorSeries& x, const MultiNetworkPath& theta) {
  if (theta.num_steps() != x.num_steps()) throw std::invalid_argument("network path length mismatch");
  for (const auto& step : theta.nets) {
    if (static_cast<int>(step.size()) != x.order()) throw std::invalid_argument("network mode count mismatch");
    for (int m = 0; m < x.order(); ++m) {
      const Matrix& net = step[static_cast<std::size_t>(m)];
      const int d = x.shape()[static_cast<std::size_t>(m)];
      if (net.rows() != d || net.cols() != d) throw std::invalid_argument("network dimension mismatch");
    }
  }
}

void validate_config(const TensorSeries& x, const KtvglConfig& config) {
  const auto modes = static_cast<std::size_t>(x.order());
  if (config.lambdas.size() != modes || config.penalties.size() != modes) {
    throw std::invalid_argument("need one lambda and one penalty per mode");
  }
  for (double l : config.lambdas) {
    if (l < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  }
  for (const PenaltySpec& p : config.penalties) {
    if (p.rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
  }
  if (config.max_outer_sweeps <= 0) throw std::invalid_argument("max_outer_sweeps must be positive");
  if (config.outer_tol <= 0.0) throw std::invalid_argument("outer_tol must be positive");
}

// Pins the per-mode global scale after a sweep. The factor scales span a
// penalty-flat direction once the estimates are sparse, and the alternating
// updates random-walk along it without a restoring force, which de-scales the
// inner problems. The rescale is uniform across time, so every represented
// K_t and every temporal profile is preserved exactly.
void equalize_gauge(MultiNetworkPath& theta) {
  const int modes = theta.num_modes();
  const int T = theta.num_steps();
  if (modes <= 1 || T == 0) return;
  double absorbed = 1.0;
  for (int m = 1; m < modes; ++m) {
    double mean_trace_ratio = 0.0;
    for (int t = 0; t < T; ++t) {
      const Matrix& net = theta.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
      mean_trace_ratio += net.trace() / static_cast<double>(net.rows());
    }
    mean_trace_ratio /= static_cast<double>(T);
    if (!(mean_trace_ratio > 0.0)) throw DataError("factor scale must stay positive");
    for (int t = 0; t < T; ++t) {
      theta.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] /= mean_trace_ratio;
    }
    absorbed *= mean_trace_ratio;
  }
  for (int t = 0; t < T; ++t) theta.nets[static_cast<std::size_t>(t)][0] *= absorbed;
}

Matrix mode_covariance_at(const TensorSeries& x, const MultiNetworkPath& theta, int mode, int t) {
  const int d = x.shape()[static_cast<std::size_t>(mode)];
  const double d_excl = static_cast<double>(x.dim_product_excluding(mode));
  Matrix s = Matrix::Zero(d, d);
  const auto& nets_t = theta.nets[static_cast<std::size_t>(t)];
  const int n_t = x.num_samples(t);
  for (int n = 0; n < n_t; ++n) {
    const DenseTensor& sample = x.sample(t, n);
    const Matrix a = unfold(sample, mode);
    const Matrix y = unfold(mode_product_all_except(sample, nets_t, mode), mode);
    s.noalias() += y * a.transpose();
  }
  s /= static_cast<double>(n_t) * d_excl;
  return symmetrized(s);
}

}  // namespace

MatrixPath MultiNetworkPath::mode_path(int mode) const {
  MatrixPath path;
  path.reserve(nets.size());
  for (const auto& step : nets) path.push_back(step.at(static_cast<std::size_t>(mode)));
  return path;
}

void MultiNetworkPath::set_mode_path(int mode, MatrixPath path) {
  if (path.size() != nets.size()) throw std::invalid_argument("mode path length mismatch");
  for (std::size_t t = 0; t < nets.size(); ++t) {
    nets[t].at(static_cast<std::size_t>(mode)) = std::move(path[t]);
  }
}

ModeCovariancePath mode_covariance(const TensorSeries& x, const MultiNetworkPath& theta, int mode) {
  if (mode < 0 || mode >= x.order()) throw std::invalid_argument("mode out of range");
  validate_networks(x, theta);
  ModeCovariancePath out;
  out.mode = mode;
  out.cov.reserve(static_cast<std::size_t>(x.num_steps()));
  for (int t = 0; t < x.num_steps(); ++t) {
    out.cov.push_back(mode_covariance_at(x, theta, mode, t));
  }
  return out;
}

std::pair<double, double> trace_identity_check(const TensorSeries& x, const MultiNetworkPath& theta,
                                               int t, int mode, std::int64_t cap) {
  if (t < 0 || t >= x.num_steps()) throw std::invalid_argument("time index out of range");
  if (mode < 0 || mode >= x.order()) throw std::invalid_argument("mode out of range");
  validate_networks(x, theta);

  const Matrix k = kron_list(theta.nets[static_cast<std::size_t>(t)], cap);
  const int n_t = x.num_samples(t);
  double lhs = 0.0;
  for (int n = 0; n < n_t; ++n) {
    const auto v = x.sample(t, n).vec();
    lhs += v.dot(k * v);
  }
  lhs /= static_cast<double>(n_t);

  const Matrix s_mode = mode_covariance_at(x, theta, mode, t);
  const double d_excl = static_cast<double>(x.dim_product_excluding(mode));
  const double rhs =
      d_excl * s_mode.cwiseProduct(theta.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(mode)]).sum();
  return {lhs, rhs};
}

double ktvgl_objective(const TensorSeries& x, const MultiNetworkPath& theta, const KtvglConfig& config) {
  validate_networks(x, theta);
  validate_config(x, config);
  const int T = x.num_steps();
  const int modes = x.order();

  double obj = 0.0;
  const double d_excl_0 = static_cast<double>(x.dim_product_excluding(0));
  for (int t = 0; t < T; ++t) {
    const auto& nets_t = theta.nets[static_cast<std::size_t>(t)];
    const Matrix s0 = mode_covariance_at(x, theta, 0, t);
    obj += d_excl_0 * s0.cwiseProduct(nets_t[0]).sum();
    for (int m = 0; m < modes; ++m) {
      obj -= static_cast<double>(x.dim_product_excluding(m)) * logdet_pd(nets_t[static_cast<std::size_t>(m)]);
      obj += config.lambdas[static_cast<std::size_t>(m)] * offdiag_l1_norm(nets_t[static_cast<std::size_t>(m)]);
    }
  }
  for (int t = 1; t < T; ++t) {
    for (int m = 0; m < modes; ++m) {
      const PenaltySpec& p = config.penalties[static_cast<std::size_t>(m)];
      obj += p.rho * psi_value(p.kind, theta.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] -
                                           theta.nets[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(m)]);
    }
  }
  return obj;
}

MultiNetworkPath init_networks(const TensorSeries& x) {
  MultiNetworkPath out;
  out.nets.reserve(static_cast<std::size_t>(x.num_steps()));
  std::vector<Matrix> step;
  step.reserve(static_cast<std::size_t>(x.order()));
  for (int m = 0; m < x.order(); ++m) {
    step.push_back(Matrix::Identity(x.shape()[static_cast<std::size_t>(m)], x.shape()[static_cast<std::size_t>(m)]));
  }
  out.nets.assign(static_cast<std::size_t>(x.num_steps()), step);
  return out;
}

KtvglResult fit_ktvgl(const TensorSeries& x, const KtvglConfig& config) {
  return fit_ktvgl(x, config, init_networks(x));
}

KtvglResult fit_ktvgl(const TensorSeries& x, const KtvglConfig& config, const MultiNetworkPath& initial) {
  return fit_ktvgl(x, config, initial, {});
}

KtvglResult fit_ktvgl(const TensorSeries& x, const KtvglConfig& config, const MultiNetworkPath& initial,
                      const std::vector<TvglSolverState>& initial_states) {
  validate_config(x, config);
  validate_networks(x, initial);
  const auto modes = static_cast<std::size_t>(x.order());
  if (!initial_states.empty() && initial_states.size() != modes) {
    throw std::invalid_argument("need one solver state per mode");
  }

  MultiNetworkPath theta = initial;
  std::vector<TvglSolverState> states =
      initial_states.empty() ? std::vector<TvglSolverState>(modes) : initial_states;
  KtvglDiagnostics diag;
  double obj_prev = ktvgl_objective(x, theta, config);
  diag.objectives.push_back(obj_prev);

  for (int sweep = 1; sweep <= config.max_outer_sweeps; ++sweep) {
    for (int m = 0; m < x.order(); ++m) {
      const double d_excl = static_cast<double>(x.dim_product_excluding(m));
      TvglConfig inner = config.inner;
      inner.lambda = config.lambdas[static_cast<std::size_t>(m)] / d_excl;
      inner.penalty = config.penalties[static_cast<std::size_t>(m)];
      inner.penalty.rho /= d_excl;
      inner.warm_start = theta.mode_path(m);
      try {
        const ModeCovariancePath s_mode = mode_covariance(x, theta, m);
        const TvglSolverState state_in = std::move(states[static_cast<std::size_t>(m)]);
        TvglResult inner_result =
            solve_tvgl(s_mode.cov, inner, state_in, &states[static_cast<std::size_t>(m)]);
        theta.set_mode_path(m, std::move(inner_result.theta));
        diag.inner_iterations.push_back(inner_result.diagnostics.iterations);
        diag.total_inner_iterations += inner_result.diagnostics.iterations;
        diag.inner_all_converged = diag.inner_all_converged && inner_result.diagnostics.converged;
      } catch (const DataError& e) {
        throw DataError("inner solve failed at sweep " + std::to_string(sweep) + ", mode " +
                        std::to_string(m) + ": " + e.what());
      }
    }
    equalize_gauge(theta);
    const double obj = ktvgl_objective(x, theta, config);
    diag.objectives.push_back(obj);
    diag.sweeps = sweep;
    if (obj > obj_prev + 1e-6 * std::abs(obj_prev)) diag.objective_increased = true;
    const double rel_decrease = (obj_prev - obj) / std::max(std::abs(obj_prev), 1e-8);
    obj_prev = obj;
    if (rel_decrease < config.outer_tol) {
      diag.converged = true;
      break;
    }
  }

  KtvglResult out;
  out.networks = std::move(theta);
  out.diagnostics = std::move(diag);
  out.solver_states = std::move(states);
  return out;
}

KtvglResult fit_static_kgl(const TensorSeries& x, const std::vector<double>& lambdas) {
  KtvglConfig config;
  config.lambdas = lambdas;
  config.penalties.assign(lambdas.size(), PenaltySpec{PenaltyKind::kLaplacian, 0.0});
  return fit_static_kgl(x, std::move(config));
}

KtvglResult fit_static_kgl(const TensorSeries& x, KtvglConfig config) {
  for (auto& p : config.penalties) p.rho = 0.0;  // one time bucket, no temporal term
  std::vector<DenseTensor> pooled;
  for (const auto& step : x.samples()) pooled.insert(pooled.end(), step.begin(), step.end());
  TensorSeries pooled_series(x.shape(), {std::move(pooled)});
  return fit_ktvgl(pooled_series, config);
}

MultiNetworkPath normalize_for_report(const MultiNetworkPath& nets) {
  MultiNetworkPath out = nets;
  for (auto& step : out.nets) {
    double absorbed = 1.0;
    for (std::size_t m = 1; m < step.size(); ++m) {
      const double trace = step[m].trace();
      const double target = static_cast<double>(step[m].rows());
      if (trace <= 0.0) throw DataError("cannot normalize a factor with nonpositive trace");
      step[m] *= target / trace;
      absorbed *= trace / target;
    }
    if (!step.empty()) step[0] *= absorbed;
  }
  return out;
}

}  // namespace ktvgl
