#pragma once

#include "ktvgl/common.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace ktvgl {

enum class PenaltyKind { kLaplacian, kL1 };

// Temporal-consistency penalty psi(Theta_t - Theta_{t-1}) with weight rho.
// Laplacian = sum of squared entries (gradual global drift), L1 = sum of
// absolute entries (few edges change at once). Applies to all entries,
// diagonal included.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::kLaplacian;
  double rho = 0.0;
};

using PrecisionPath = MatrixPath;   // symmetric positive-definite per step
using CovariancePath = MatrixPath;  // symmetric positive-semidefinite per step

struct TvglConfig {
  double lambda = 0.0;  // off-diagonal l1 weight
  PenaltySpec penalty;
  double admm_step = 1.0;  // eta
  int max_admm_iters = 2000;
  double eps_abs = 1e-5;
  double eps_rel = 1e-4;
  bool adaptive_step = false;  // residual-balancing step adjustment
  std::optional<PrecisionPath> warm_start;
};

// Full ADMM state for warm restarts. A primal-only restart forces the solver
// to rebuild its scaled duals from zero, which routinely costs more
// iterations than a cold start; re-solving a slightly perturbed problem from
// the complete state is what actually cuts the iteration count.
struct TvglSolverState {
  MatrixPath z0, u0;  // length T: consensus and dual for the sparsity block
  MatrixPath z1, u1;  // length T-1: left side of each temporal pair
  MatrixPath z2, u2;  // length T-1: right side of each temporal pair
  double eta = 1.0;   // step the duals are scaled by

  bool empty() const { return z0.empty(); }
};

struct TvglDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  bool converged = false;
};

struct TvglResult {
  PrecisionPath theta;
  TvglDiagnostics diagnostics;
};

double psi_value(PenaltyKind kind, const Matrix& delta);

// Unique minimizer of tr(S*Theta) - logdet(Theta) + (eta/2)*||Theta - A||_F^2,
// via the eigendecomposition of eta*A - S. Always positive definite.
Matrix prox_logdet(const Matrix& s, const Matrix& a, double eta);

// Element-wise soft threshold on off-diagonal entries; diagonal untouched.
Matrix prox_offdiag_l1(const Matrix& a, double kappa);

// Minimizer of rho*psi(Z2 - Z1) + (eta/2)*(||Z1 - A1||_F^2 + ||Z2 - A2||_F^2).
std::pair<Matrix, Matrix> prox_temporal_pair(const Matrix& a1, const Matrix& a2,
                                             const PenaltySpec& penalty, double eta);

// Sum over t of tr(S_t*Theta_t) - logdet(Theta_t) + lambda*||Theta_t||_1,od
// plus rho * sum over t >= 1 of psi(Theta_t - Theta_{t-1}).
double tvgl_objective(const CovariancePath& s, const PrecisionPath& theta, double lambda,
                      const PenaltySpec& penalty);

// ADMM solve of the time-varying graphical lasso. Deterministic given inputs
// and config. Throws DataError on asymmetric or indefinite covariance input;
// a run that exhausts max_admm_iters returns its best iterate with
// diagnostics.converged = false.
TvglResult solve_tvgl(const CovariancePath& s, const TvglConfig& config);

// As above, optionally resuming from a previous solve's internal state
// (state_in, ignored when empty) and exporting the final state (state_out,
// ignored when null). config.warm_start still supplies the primal
// initialization whenever state_in is empty.
TvglResult solve_tvgl(const CovariancePath& s, const TvglConfig& config,
                      const TvglSolverState& state_in, TvglSolverState* state_out);

// log(det(m)) through Cholesky; throws DataError if m is not positive definite.
double logdet_pd(const Matrix& m);

}  // namespace ktvgl
