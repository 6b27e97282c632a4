#include "ktvgl/stream.hpp"

#include "ktvgl/benchmark.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace ktvgl;

namespace {

KtvglConfig stream_config(int modes) {
  KtvglConfig config;
  config.lambdas.assign(static_cast<std::size_t>(modes), 0.05);
  config.penalties.assign(static_cast<std::size_t>(modes), PenaltySpec{PenaltyKind::kLaplacian, 0.5});
  return config;
}

TensorSeries identity_series(int steps, std::uint64_t seed) {
  GroundTruth truth;
  truth.networks.nets.assign(static_cast<std::size_t>(steps),
                             {Matrix::Identity(3, 3), Matrix::Identity(3, 3)});
  truth.change_points = {{}, {}};
  return sample_series(truth, 2, seed);
}

}  // namespace

TEST_SUITE_BEGIN("stream");

TEST_CASE("window must be at least two") {
  CHECK_THROWS_AS(StreamEstimator({3, 3}, 1, stream_config(2)), std::invalid_argument);
}

TEST_CASE("current before any push is an error") {
  StreamEstimator estimator({3, 3}, 4, stream_config(2));
  CHECK_THROWS_AS(estimator.current(), std::logic_error);
}

TEST_CASE("pushes grow the buffer up to the window and then slide") {
  const TensorSeries x = identity_series(7, 101);
  StreamEstimator estimator({3, 3}, 4, stream_config(2));
  estimator.push(x.samples()[0]);
  CHECK(estimator.current().num_steps() == 1);
  for (int t = 1; t < 7; ++t) estimator.push(x.samples()[static_cast<std::size_t>(t)]);
  CHECK(estimator.current().num_steps() == 4);
  CHECK(estimator.steps_seen() == 7);
}

TEST_CASE("stationary identity data yields near-diagonal newest estimates") {
  const TensorSeries x = identity_series(8, 102);
  KtvglConfig config;
  config.lambdas = {1.0, 1.0};
  config.penalties.assign(2, PenaltySpec{PenaltyKind::kLaplacian, 1.0});
  StreamEstimator estimator({3, 3}, 4, config);
  PushResult last;
  for (int t = 0; t < 8; ++t) last = estimator.push(x.samples()[static_cast<std::size_t>(t)]);
  for (const Matrix& net : last.newest) {
    CHECK(offdiag_l1_norm(net) / net.diagonal().sum() <= 0.1);
  }
}

TEST_CASE("repeating one observation reaches a fixed point") {
  Rng rng(103);
  // A single step rich enough to make the window fit well posed.
  std::vector<DenseTensor> obs;
  for (int n = 0; n < 6; ++n) obs.push_back(test::random_tensor({3, 3}, rng));
  StreamEstimator estimator({3, 3}, 4, stream_config(2));
  std::vector<Matrix> prev;
  double last_change = 1.0;
  for (int t = 0; t < 10; ++t) {
    PushResult r = estimator.push(obs);
    if (t >= 4 && !prev.empty()) {
      last_change = 0.0;
      for (std::size_t m = 0; m < prev.size(); ++m) {
        last_change = std::max(last_change, (r.newest[m] - prev[m]).norm());
      }
    }
    prev = r.newest;
  }
  CHECK(last_change < 1e-4);
}

TEST_CASE("returned newest estimates equal the stored window path") {
  const TensorSeries x = identity_series(6, 104);
  StreamEstimator estimator({3, 3}, 4, stream_config(2));
  for (int t = 0; t < 6; ++t) {
    const PushResult r = estimator.push(x.samples()[static_cast<std::size_t>(t)]);
    const auto& stored = estimator.current().nets.back();
    REQUIRE(stored.size() == r.newest.size());
    for (std::size_t m = 0; m < stored.size(); ++m) CHECK(stored[m] == r.newest[m]);
  }
}

TEST_CASE("estimates are causal: replaying a prefix reproduces them") {
  const GroundTruth truth = gen_network_path({3, 3}, 10, {{5}, {}}, 0.3, {-2.0, 2.0}, 105);
  const TensorSeries x = sample_series(truth, 1, 106);

  StreamEstimator full({3, 3}, 4, stream_config(2));
  std::vector<std::vector<Matrix>> full_estimates;
  for (int t = 0; t < 10; ++t) full_estimates.push_back(full.push(x.samples()[static_cast<std::size_t>(t)]).newest);

  StreamEstimator prefix({3, 3}, 4, stream_config(2));
  for (int t = 0; t < 6; ++t) {
    const PushResult r = prefix.push(x.samples()[static_cast<std::size_t>(t)]);
    for (std::size_t m = 0; m < r.newest.size(); ++m) {
      CHECK(r.newest[m] == full_estimates[static_cast<std::size_t>(t)][m]);
    }
  }
}

TEST_CASE("shape mismatches are rejected") {
  StreamEstimator estimator({3, 3}, 4, stream_config(2));
  Rng rng(107);
  CHECK_THROWS_AS(estimator.push({test::random_tensor({3, 2}, rng)}), std::invalid_argument);
  CHECK_THROWS_AS(estimator.push({}), std::invalid_argument);
}

TEST_CASE("warm starts use no more inner iterations than a cold fit of the window") {
  const GroundTruth truth = gen_network_path({3, 3}, 12, {{}, {}}, 0.3, {-2.0, 2.0}, 108);
  const TensorSeries x = sample_series(truth, 4, 109);
  KtvglConfig config;
  config.lambdas = {0.1, 0.1};
  config.penalties.assign(2, PenaltySpec{PenaltyKind::kLaplacian, 1.0});
  StreamEstimator estimator({3, 3}, 5, config);
  for (int t = 0; t < 12; ++t) {
    const PushResult r = estimator.push(x.samples()[static_cast<std::size_t>(t)]);
    if (t >= 5) {
      std::vector<std::vector<DenseTensor>> window_samples;
      for (int u = t - 4; u <= t; ++u) window_samples.push_back(x.samples()[static_cast<std::size_t>(u)]);
      const KtvglResult cold = fit_ktvgl(TensorSeries({3, 3}, std::move(window_samples)), config);
      REQUIRE(cold.diagnostics.converged);
      CHECK(r.inner_iterations <= cold.diagnostics.total_inner_iterations);
    }
  }
}

TEST_SUITE_END();
