#include "ktvgl/tvgl.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cassert>
#include <cmath>

namespace ktvgl {

namespace {

double soft(double x, double k) { return x > k ? x - k : (x < -k ? x + k : 0.0); }

void symmetrize_in_place(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
}

// Positive root of eta*x^2 - mu*x - 1 = 0. The rearranged form avoids
// cancellation when mu is large and negative.
double logdet_prox_eigenvalue(double mu, double eta) {
  const double disc = std::sqrt(mu * mu + 4.0 * eta);
  return mu > 0.0 ? (mu + disc) / (2.0 * eta) : 2.0 / (disc - mu);
}

// Shared core of prox_logdet: writes the minimizer into out and returns
// log(det(out)), reusing the caller's eigensolver and scratch workspaces.
double prox_logdet_into(const Matrix& s, const Matrix& a, double eta,
                        Eigen::SelfAdjointEigenSolver<Matrix>& es, Matrix& scratch, Vector& vals,
                        Matrix& out) {
  scratch = eta * a - s;
  symmetrize_in_place(scratch);
  if (!scratch.allFinite()) throw DataError("prox_logdet input is not finite");
  es.compute(scratch);
  if (es.info() != Eigen::Success) throw DataError("prox_logdet eigendecomposition failed");
  vals = es.eigenvalues();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    vals[i] = logdet_prox_eigenvalue(vals[i], eta);
    assert(vals[i] > 0.0);
    logdet += std::log(vals[i]);
  }
  scratch.noalias() = es.eigenvectors() * vals.asDiagonal();
  out.noalias() = scratch * es.eigenvectors().transpose();
  symmetrize_in_place(out);
  return logdet;
}

void validate_covariance_path(const CovariancePath& s) {
  if (s.empty()) throw std::invalid_argument("covariance path is empty");
  const Eigen::Index d = s.front().rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  for (const Matrix& m : s) {
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("covariance dimensions differ across time");
    if (!m.allFinite()) throw DataError("covariance contains non-finite values");
    if (!is_symmetric(m, 1e-8)) throw DataError("covariance is not symmetric within tolerance");
    es.compute(m, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-8 * scale) {
      throw DataError("covariance is not positive semidefinite within tolerance");
    }
  }
}

void validate_config(const TvglConfig& config) {
  if (config.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (config.penalty.rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
  if (config.admm_step <= 0.0) throw std::invalid_argument("admm_step must be positive");
  if (config.max_admm_iters <= 0) throw std::invalid_argument("max_admm_iters must be positive");
  if (config.eps_abs <= 0.0 || config.eps_rel <= 0.0) {
    throw std::invalid_argument("stopping tolerances must be positive");
  }
}

}  // namespace

double psi_value(PenaltyKind kind, const Matrix& delta) {
  switch (kind) {
    case PenaltyKind::kLaplacian:
      return delta.squaredNorm();
    case PenaltyKind::kL1:
      return delta.cwiseAbs().sum();
  }
  throw std::invalid_argument("unknown penalty kind");
}

double logdet_pd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw DataError("logdet requires a positive-definite matrix");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Matrix prox_logdet(const Matrix& s, const Matrix& a, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("prox_logdet requires eta > 0");
  if (s.rows() != s.cols() || a.rows() != a.cols() || s.rows() != a.rows()) {
    throw std::invalid_argument("prox_logdet dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.rows());
  Matrix scratch(s.rows(), s.cols());
  Vector vals(s.rows());
  Matrix out(s.rows(), s.cols());
  prox_logdet_into(s, a, eta, es, scratch, vals, out);
  return out;
}

Matrix prox_offdiag_l1(const Matrix& a, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("soft-threshold parameter must be nonnegative");
  Matrix out = a;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      if (i != j) out(i, j) = soft(out(i, j), kappa);
    }
  }
  return out;
}

std::pair<Matrix, Matrix> prox_temporal_pair(const Matrix& a1, const Matrix& a2,
                                             const PenaltySpec& penalty, double eta) {
  if (a1.rows() != a2.rows() || a1.cols() != a2.cols()) {
    throw std::invalid_argument("prox_temporal_pair dimension mismatch");
  }
  if (eta <= 0.0) throw std::invalid_argument("prox_temporal_pair requires eta > 0");
  if (penalty.rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
  if (penalty.rho == 0.0) return {a1, a2};
  const Matrix sum = a1 + a2;
  Matrix dstar = a2 - a1;
  if (penalty.kind == PenaltyKind::kLaplacian) {
    dstar *= eta / (eta + 4.0 * penalty.rho);
  } else {
    const double kappa = 2.0 * penalty.rho / eta;
    dstar = dstar.unaryExpr([kappa](double v) { return soft(v, kappa); });
  }
  return {0.5 * (sum - dstar), 0.5 * (sum + dstar)};
}

double tvgl_objective(const CovariancePath& s, const PrecisionPath& theta, double lambda,
                      const PenaltySpec& penalty) {
  if (s.size() != theta.size() || s.empty()) {
    throw std::invalid_argument("objective needs matching non-empty paths");
  }
  double obj = 0.0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    obj += s[t].cwiseProduct(theta[t]).sum() - logdet_pd(theta[t]) + lambda * offdiag_l1_norm(theta[t]);
  }
  for (std::size_t t = 1; t < theta.size(); ++t) {
    obj += penalty.rho * psi_value(penalty.kind, theta[t] - theta[t - 1]);
  }
  return obj;
}

TvglResult solve_tvgl(const CovariancePath& s, const TvglConfig& config) {
  return solve_tvgl(s, config, TvglSolverState{}, nullptr);
}

TvglResult solve_tvgl(const CovariancePath& s_path, const TvglConfig& config,
                      const TvglSolverState& state_in, TvglSolverState* state_out) {
  validate_covariance_path(s_path);
  validate_config(config);

  const int T = static_cast<int>(s_path.size());
  const Eigen::Index d = s_path.front().rows();
  const int pairs = T - 1;
  const double lambda = config.lambda;
  const PenaltySpec penalty = config.penalty;
  double eta = config.admm_step;

  PrecisionPath theta;
  if (config.warm_start) {
    const PrecisionPath& ws = *config.warm_start;
    if (static_cast<int>(ws.size()) != T) throw std::invalid_argument("warm start length mismatch");
    theta.reserve(static_cast<std::size_t>(T));
    for (const Matrix& m : ws) {
      if (m.rows() != d || m.cols() != d) throw std::invalid_argument("warm start dimension mismatch");
      theta.push_back(symmetrized(m));
    }
  } else {
    theta.assign(static_cast<std::size_t>(T), Matrix::Identity(d, d));
  }

  const PrecisionPath init_theta = theta;
  // Also enforces that the warm start is positive definite.
  const double init_obj = tvgl_objective(s_path, init_theta, lambda, penalty);

  PrecisionPath z0, z1, z2;
  MatrixPath u0, u1, u2;
  if (!state_in.empty()) {
    if (static_cast<int>(state_in.z0.size()) != T || static_cast<int>(state_in.u0.size()) != T ||
        static_cast<int>(state_in.z1.size()) != pairs || static_cast<int>(state_in.u1.size()) != pairs ||
        static_cast<int>(state_in.z2.size()) != pairs || static_cast<int>(state_in.u2.size()) != pairs) {
      throw std::invalid_argument("solver state length mismatch");
    }
    for (const MatrixPath* part : {&state_in.z0, &state_in.u0, &state_in.z1, &state_in.u1,
                                   &state_in.z2, &state_in.u2}) {
      for (const Matrix& m : *part) {
        if (m.rows() != d || m.cols() != d) throw std::invalid_argument("solver state dimension mismatch");
      }
    }
    if (!(state_in.eta > 0.0)) throw std::invalid_argument("solver state step must be positive");
    z0 = state_in.z0;
    z1 = state_in.z1;
    z2 = state_in.z2;
    u0 = state_in.u0;
    u1 = state_in.u1;
    u2 = state_in.u2;
    // Scaled duals transfer across step sizes as u * eta_old / eta_new.
    const double rescale = state_in.eta / eta;
    if (rescale != 1.0) {
      for (auto& m : u0) m *= rescale;
      for (auto& m : u1) m *= rescale;
      for (auto& m : u2) m *= rescale;
    }
  } else {
    z0 = theta;
    z1.assign(theta.begin(), theta.end() - 1);
    z2.assign(theta.begin() + 1, theta.end());
    u0.assign(static_cast<std::size_t>(T), Matrix::Zero(d, d));
    u1.assign(static_cast<std::size_t>(pairs), Matrix::Zero(d, d));
    u2.assign(static_cast<std::size_t>(pairs), Matrix::Zero(d, d));
  }
  MatrixPath dz(static_cast<std::size_t>(T), Matrix::Zero(d, d));  // per-time consensus movement

  Eigen::SelfAdjointEigenSolver<Matrix> es(d);
  Matrix scratch(d, d), acc(d, d), diff(d, d);
  Vector eigvals(d);
  std::vector<double> logdets(static_cast<std::size_t>(T), 0.0);

  const double n_vars = static_cast<double>(T) * static_cast<double>(d) * static_cast<double>(d);
  const double n_cons = static_cast<double>(T + 2 * pairs) * static_cast<double>(d) * static_cast<double>(d);

  double best_obj = init_obj;
  PrecisionPath best_theta = init_theta;
  double obj = init_obj;
  double r_norm = 0.0, s_norm = 0.0;
  bool converged = false;
  int iterations = 0;

  for (int iter = 1; iter <= config.max_admm_iters; ++iter) {
    iterations = iter;

    for (int t = 0; t < T; ++t) {
      acc = z0[t] - u0[t];
      int blocks = 1;
      if (t < pairs) {
        acc += z1[t] - u1[t];
        ++blocks;
      }
      if (t > 0) {
        acc += z2[t - 1] - u2[t - 1];
        ++blocks;
      }
      acc /= static_cast<double>(blocks);
      logdets[static_cast<std::size_t>(t)] =
          prox_logdet_into(s_path[t], acc, static_cast<double>(blocks) * eta, es, scratch, eigvals, theta[t]);
    }

    obj = 0.0;
    for (int t = 0; t < T; ++t) {
      obj += s_path[t].cwiseProduct(theta[t]).sum() - logdets[static_cast<std::size_t>(t)] +
             lambda * offdiag_l1_norm(theta[t]);
    }
    if (penalty.rho > 0.0) {
      for (int t = 1; t < T; ++t) {
        obj += penalty.rho * (penalty.kind == PenaltyKind::kLaplacian
                                  ? (theta[t] - theta[t - 1]).squaredNorm()
                                  : (theta[t] - theta[t - 1]).cwiseAbs().sum());
      }
    }
    if (obj < best_obj) {
      best_obj = obj;
      best_theta = theta;
    }

    for (auto& m : dz) m.setZero();
    const double kappa = lambda / eta;
    for (int t = 0; t < T; ++t) {
      Matrix& z = z0[t];
      dz[t] -= z;
      const Matrix& th = theta[t];
      const Matrix& u = u0[t];
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          const double v = th(i, j) + u(i, j);
          z(i, j) = i == j ? v : soft(v, kappa);
        }
      }
      dz[t] += z;
    }
    const bool laplacian = penalty.kind == PenaltyKind::kLaplacian;
    const double shrink_factor = eta / (eta + 4.0 * penalty.rho);
    const double pair_kappa = 2.0 * penalty.rho / eta;
    for (int p = 0; p < pairs; ++p) {
      Matrix& za = z1[p];
      Matrix& zb = z2[p];
      dz[p] -= za;
      dz[p + 1] -= zb;
      const Matrix& tha = theta[p];
      const Matrix& thb = theta[p + 1];
      const Matrix& ua = u1[p];
      const Matrix& ub = u2[p];
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          const double a = tha(i, j) + ua(i, j);
          const double b = thb(i, j) + ub(i, j);
          const double dd = penalty.rho == 0.0 ? b - a
                            : laplacian        ? (b - a) * shrink_factor
                                               : soft(b - a, pair_kappa);
          za(i, j) = 0.5 * (a + b - dd);
          zb(i, j) = 0.5 * (a + b + dd);
        }
      }
      dz[p] += za;
      dz[p + 1] += zb;
    }

    double r_sq = 0.0;
    for (int t = 0; t < T; ++t) {
      diff = theta[t] - z0[t];
      u0[t] += diff;
      r_sq += diff.squaredNorm();
    }
    for (int p = 0; p < pairs; ++p) {
      diff = theta[p] - z1[p];
      u1[p] += diff;
      r_sq += diff.squaredNorm();
      diff = theta[p + 1] - z2[p];
      u2[p] += diff;
      r_sq += diff.squaredNorm();
    }

    double s_sq = 0.0;
    for (int t = 0; t < T; ++t) s_sq += dz[t].squaredNorm();

    double ax_sq = 0.0, z_sq = 0.0, atu_sq = 0.0;
    for (int t = 0; t < T; ++t) {
      int blocks = 1;
      if (t < pairs) ++blocks;
      if (t > 0) ++blocks;
      ax_sq += static_cast<double>(blocks) * theta[t].squaredNorm();
      z_sq += z0[t].squaredNorm();
      acc = u0[t];
      if (t < pairs) {
        z_sq += z1[t].squaredNorm();
        acc += u1[t];
      }
      if (t > 0) {
        z_sq += z2[t - 1].squaredNorm();
        acc += u2[t - 1];
      }
      atu_sq += acc.squaredNorm();
    }

    r_norm = std::sqrt(r_sq);
    s_norm = eta * std::sqrt(s_sq);
    const double eps_pri =
        std::sqrt(n_cons) * config.eps_abs + config.eps_rel * std::sqrt(std::max(ax_sq, z_sq));
    const double eps_dual = std::sqrt(n_vars) * config.eps_abs + config.eps_rel * eta * std::sqrt(atu_sq);
    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      converged = true;
      break;
    }

    if (config.adaptive_step) {
      double factor = 1.0;
      if (r_norm > 10.0 * s_norm && eta < 1e6) {
        factor = 2.0;
      } else if (s_norm > 10.0 * r_norm && eta > 1e-6) {
        factor = 0.5;
      }
      if (factor != 1.0) {
        eta *= factor;
        for (auto& m : u0) m /= factor;
        for (auto& m : u1) m /= factor;
        for (auto& m : u2) m /= factor;
      }
    }
  }

  if (state_out != nullptr) {
    state_out->z0 = z0;
    state_out->u0 = std::move(u0);
    state_out->z1 = std::move(z1);
    state_out->u1 = std::move(u1);
    state_out->z2 = std::move(z2);
    state_out->u2 = std::move(u2);
    state_out->eta = eta;
  }

  PrecisionPath result;
  double result_obj;
  if (converged) {
    result = std::move(theta);
    result_obj = obj;
  } else {
    result = std::move(best_theta);
    result_obj = best_obj;
  }
  if (init_obj < result_obj) {
    result = init_theta;
    result_obj = init_obj;
  }

  TvglResult out;
  out.theta = std::move(result);
  out.diagnostics.iterations = iterations;
  out.diagnostics.primal_residual = r_norm;
  out.diagnostics.dual_residual = s_norm;
  out.diagnostics.objective = result_obj;
  out.diagnostics.converged = converged;
  return out;
}

}  // namespace ktvgl
