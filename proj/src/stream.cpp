#include "ktvgl/stream.hpp"

#include <chrono>

namespace ktvgl {

namespace {

// Advances one mode's ADMM state by one window position. Surviving slots
// keep their state; the slot opened for the newest step replicates the old
// newest slot, matching the primal warm-start policy.
TvglSolverState shift_state(const TvglSolverState& old_state, bool evict) {
  TvglSolverState next;
  if (old_state.empty() || old_state.z1.empty()) return next;  // too short to shift usefully
  next.eta = old_state.eta;
  const auto shift = [evict](const MatrixPath& path) {
    MatrixPath out(path.begin() + (evict ? 1 : 0), path.end());
    out.push_back(path.back());
    return out;
  };
  next.z0 = shift(old_state.z0);
  next.u0 = shift(old_state.u0);
  next.z1 = shift(old_state.z1);
  next.u1 = shift(old_state.u1);
  next.z2 = shift(old_state.z2);
  next.u2 = shift(old_state.u2);
  return next;
}

}  // namespace

StreamEstimator::StreamEstimator(std::vector<int> shape, int window, KtvglConfig config)
    : shape_(std::move(shape)), window_(window), config_(std::move(config)) {
  shape_size(shape_);
  if (window_ < 2) throw std::invalid_argument("stream window must be at least 2");
}

PushResult StreamEstimator::push(std::vector<DenseTensor> observation) {
  const auto start = std::chrono::steady_clock::now();
  if (observation.empty()) throw std::invalid_argument("push needs at least one sample");
  for (const DenseTensor& sample : observation) {
    if (sample.shape() != shape_) throw std::invalid_argument("pushed sample shape mismatch");
  }

  const bool evict = static_cast<int>(buffer_.size()) == window_;
  buffer_.push_back(std::move(observation));
  if (static_cast<int>(buffer_.size()) > window_) buffer_.pop_front();
  ++steps_seen_;

  std::vector<std::vector<DenseTensor>> window_samples(buffer_.begin(), buffer_.end());
  TensorSeries window_series(shape_, std::move(window_samples));
  const int T = window_series.num_steps();

  // Warm start: surviving positions keep their previous estimates (shifted by
  // one when the oldest step was evicted); the newest position copies the
  // previous newest estimate. The first push starts from identities.
  MultiNetworkPath initial = init_networks(window_series);
  if (steps_seen_ > 1) {
    const int prev_len = last_estimate_.num_steps();
    const int shift = evict ? 1 : 0;
    for (int t = 0; t + 1 < T; ++t) {
      initial.nets[static_cast<std::size_t>(t)] = last_estimate_.nets[static_cast<std::size_t>(t + shift)];
    }
    initial.nets[static_cast<std::size_t>(T - 1)] = last_estimate_.nets[static_cast<std::size_t>(prev_len - 1)];
  }
  std::vector<TvglSolverState> states;
  if (steps_seen_ > 1 && !last_states_.empty()) {
    states.reserve(last_states_.size());
    for (const TvglSolverState& s : last_states_) states.push_back(shift_state(s, evict));
  }

  KtvglResult fit = fit_ktvgl(window_series, config_, initial, states);
  last_estimate_ = std::move(fit.networks);
  last_states_ = std::move(fit.solver_states);

  PushResult out;
  out.newest = last_estimate_.nets.back();
  out.sweeps = fit.diagnostics.sweeps;
  out.inner_iterations = fit.diagnostics.total_inner_iterations;
  out.converged = fit.diagnostics.inner_all_converged;
  out.fit_diagnostics = std::move(fit.diagnostics);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

const MultiNetworkPath& StreamEstimator::current() const {
  if (steps_seen_ == 0) throw std::logic_error("stream estimator has no observations yet");
  return last_estimate_;
}

}  // namespace ktvgl
