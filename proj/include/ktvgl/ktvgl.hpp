#pragma once

#include "ktvgl/tensor.hpp"
#include "ktvgl/tvgl.hpp"

#include <utility>
#include <vector>

namespace ktvgl {

// Mode-specific networks over time: nets[t][m] is the d_m x d_m precision
// matrix of mode m at step t. The flattened precision at step t is the
// Kronecker product of nets[t][0], ..., nets[t][M-1] in mode order.
struct MultiNetworkPath {
  std::vector<std::vector<Matrix>> nets;

  int num_steps() const { return static_cast<int>(nets.size()); }
  int num_modes() const { return nets.empty() ? 0 : static_cast<int>(nets.front().size()); }

  MatrixPath mode_path(int mode) const;
  void set_mode_path(int mode, MatrixPath path);
};

struct KtvglConfig {
  std::vector<double> lambdas;         // off-diagonal l1 weight per mode
  std::vector<PenaltySpec> penalties;  // temporal penalty per mode
  // Template for the inner TVGL solves; lambda, penalty and warm_start are
  // overwritten per mode. The per-mode weights are divided by the product of
  // the other modes' dimensions before they reach the inner solver.
  TvglConfig inner;
  int max_outer_sweeps = 10;
  double outer_tol = 1e-4;  // relative objective decrease across a sweep
  bool report_normalization = false;
};

struct KtvglDiagnostics {
  int sweeps = 0;
  // objectives[0] is the initialization value; one entry per completed sweep after that.
  std::vector<double> objectives;
  std::vector<int> inner_iterations;  // one entry per inner solve, sweep-major
  int total_inner_iterations = 0;
  bool converged = false;
  bool inner_all_converged = true;
  // Set when the objective rose by more than 1e-6*|obj| across a sweep,
  // which indicates the inner tolerances are too loose.
  bool objective_increased = false;
};

struct KtvglResult {
  MultiNetworkPath networks;
  KtvglDiagnostics diagnostics;
  // Final inner-solver state per mode; feed back in to resume on a slightly
  // changed problem (sliding windows).
  std::vector<TvglSolverState> solver_states;
};

// Whitened mode-m scatter path: one d_m x d_m matrix per step, with the
// influence of the other modes cancelled through their current precisions.
struct ModeCovariancePath {
  CovariancePath cov;
  int mode = 0;
};

// S_t = (1 / (n_t * D_excl)) * sum_n unfold(X ×_{l != m} Theta_t^(l), m) * unfold(X, m)^T,
// symmetrized. Never materializes the Kronecker product of the co-factors.
ModeCovariancePath mode_covariance(const TensorSeries& x, const MultiNetworkPath& theta, int mode);

// Returns (tr(S_t K_t) via explicit flattening, D_excl * tr(S_t^(m) Theta_t^(m))).
// The two agree for every mode; exposed for tests and diagnostics.
std::pair<double, double> trace_identity_check(const TensorSeries& x, const MultiNetworkPath& theta,
                                               int t, int mode, std::int64_t cap = kDefaultKronCap);

// Full objective without materializing the flattened precision: the trace
// term goes through the mode-0 covariance, the logdet through the factor
// logdets weighted by the complementary dimension products.
double ktvgl_objective(const TensorSeries& x, const MultiNetworkPath& theta, const KtvglConfig& config);

// Identity networks for every (t, mode).
MultiNetworkPath init_networks(const TensorSeries& x);

// Alternating optimization: per sweep, for each mode in ascending order,
// rebuilds the mode covariance and re-solves the TVGL subproblem warm-started
// from the current estimate. Stops when the relative objective decrease over
// a full sweep drops below outer_tol.
KtvglResult fit_ktvgl(const TensorSeries& x, const KtvglConfig& config);
KtvglResult fit_ktvgl(const TensorSeries& x, const KtvglConfig& config, const MultiNetworkPath& initial);
KtvglResult fit_ktvgl(const TensorSeries& x, const KtvglConfig& config, const MultiNetworkPath& initial,
                      const std::vector<TvglSolverState>& initial_states);

// Static baseline: pools all samples into a single time bucket and fits one
// network per mode (temporal weight zero).
KtvglResult fit_static_kgl(const TensorSeries& x, const std::vector<double>& lambdas);
KtvglResult fit_static_kgl(const TensorSeries& x, KtvglConfig config);

// Reporting-only rescaling of the Kronecker scale indeterminacy: every factor
// with mode >= 1 is scaled to trace d_m and the compensation is absorbed into
// the mode-0 factor. Never applied during optimization.
MultiNetworkPath normalize_for_report(const MultiNetworkPath& nets);

}  // namespace ktvgl
