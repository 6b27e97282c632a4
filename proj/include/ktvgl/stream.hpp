#pragma once

#include "ktvgl/ktvgl.hpp"

#include <deque>
#include <vector>

namespace ktvgl {

struct PushResult {
  std::vector<Matrix> newest;  // mode networks at the just-arrived step
  double wall_time_s = 0.0;
  int sweeps = 0;
  int inner_iterations = 0;  // total inner ADMM iterations for this push
  bool converged = false;
  KtvglDiagnostics fit_diagnostics;
};

// Sliding-window estimator: each arrival re-fits the most recent window,
// warm-started from the previous window's networks shifted by one step.
// Single-owner; concurrent pushes on one instance are not supported.
class StreamEstimator {
 public:
  StreamEstimator(std::vector<int> shape, int window, KtvglConfig config);

  // Appends one time step (n_t >= 1 samples), evicts the oldest step once
  // the buffer exceeds the window, and re-fits. Returns the estimate at the
  // newest position; that value is final and never revised by later pushes.
  PushResult push(std::vector<DenseTensor> observation);

  // Networks over the current buffer. Requires at least one push.
  const MultiNetworkPath& current() const;

  int steps_seen() const { return steps_seen_; }
  int buffer_size() const { return static_cast<int>(buffer_.size()); }
  int window() const { return window_; }

 private:
  std::vector<int> shape_;
  int window_;
  KtvglConfig config_;
  std::deque<std::vector<DenseTensor>> buffer_;
  MultiNetworkPath last_estimate_;
  std::vector<TvglSolverState> last_states_;
  int steps_seen_ = 0;
};

}  // namespace ktvgl
