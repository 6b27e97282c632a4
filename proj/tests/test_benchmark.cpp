#include "ktvgl/benchmark.hpp"

#include "ktvgl/metrics.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace ktvgl;

namespace {

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Pair-counting AUC: fraction of (positive, negative) pairs ranked correctly,
// ties counted half.
double pair_count_auc(std::span<const double> scores, std::span<const int> labels) {
  double correct = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        correct += 1.0;
      } else if (scores[i] == scores[j]) {
        correct += 0.5;
      }
    }
  }
  return correct / static_cast<double>(pairs);
}

struct Confusion {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (predicted && labels[i] == 1) ++c.tp;
    if (predicted && labels[i] == 0) ++c.fp;
    if (!predicted && labels[i] == 1) ++c.fn;
  }
  return c;
}

// From-scratch threshold enumeration for average precision and best F1.
std::pair<double, double> exhaustive_pr_and_f1(std::span<const double> scores, std::span<const int> labels) {
  std::vector<double> thresholds(scores.begin(), scores.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double ap = 0.0, prev_recall = 0.0, best = 0.0;
  std::int64_t positives = 0;
  for (int label : labels) positives += label;
  for (double tau : thresholds) {
    const Confusion c = confusion_at(scores, labels, tau);
    const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double recall = static_cast<double>(c.tp) / static_cast<double>(positives);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    if (c.tp > 0) best = std::max(best, 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn));
  }
  return {ap, best};
}

}  // namespace

TEST_SUITE_BEGIN("benchmark");

TEST_CASE("zero edge probability gives the bare diagonal shift") {
  Rng rng(201);
  const Matrix theta = gen_er_precision(4, 0.0, {-3.0, 3.0}, rng);
  CHECK(theta.isApprox(0.1 * Matrix::Identity(4, 4)));
}

TEST_CASE("full edge probability forces a symmetric dense support") {
  Rng rng(202);
  const Matrix theta = gen_er_precision(2, 1.0, {-3.0, 3.0}, rng);
  CHECK(theta(0, 1) == theta(1, 0));
  CHECK(theta(0, 1) != 0.0);
  CHECK(min_eigenvalue(theta) > 0.0);
}

TEST_CASE("edge fill fraction matches the requested probability") {
  Rng rng(203);
  double fill = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Matrix theta = gen_er_precision(10, 0.25, {-3.0, 3.0}, rng);
    CHECK(min_eigenvalue(theta) >= 0.1 - 1e-9);
    int edges = 0;
    for (int i = 0; i < 10; ++i) {
      for (int j = i + 1; j < 10; ++j) {
        if (theta(i, j) != 0.0) ++edges;
      }
    }
    fill += static_cast<double>(edges) / 45.0;
  }
  fill /= 1000.0;
  CHECK(std::abs(fill - 0.25) <= 0.03);
}

TEST_CASE("network paths are piecewise constant with changes exactly at the listed steps") {
  const GroundTruth truth = gen_network_path({4, 3}, 30, {{10, 20}, {15}}, 0.4, {-2.0, 2.0}, 42);
  for (int t = 1; t < 30; ++t) {
    const bool mode0_change = t == 10 || t == 20;
    const bool mode1_change = t == 15;
    const Matrix d0 = truth.networks.nets[static_cast<std::size_t>(t)][0] -
                      truth.networks.nets[static_cast<std::size_t>(t - 1)][0];
    const Matrix d1 = truth.networks.nets[static_cast<std::size_t>(t)][1] -
                      truth.networks.nets[static_cast<std::size_t>(t - 1)][1];
    CHECK((d0.norm() > 0.0) == mode0_change);
    CHECK((d1.norm() > 0.0) == mode1_change);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  const GroundTruth a = gen_network_path({3, 3}, 10, {{5}, {7}}, 0.25, {-3.0, 3.0}, 9);
  const GroundTruth b = gen_network_path({3, 3}, 10, {{5}, {7}}, 0.25, {-3.0, 3.0}, 9);
  for (int t = 0; t < 10; ++t) {
    for (int m = 0; m < 2; ++m) {
      CHECK(a.networks.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] ==
            b.networks.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)]);
    }
  }
  const TensorSeries xa = sample_series(a, 2, 10);
  const TensorSeries xb = sample_series(b, 2, 10);
  for (int t = 0; t < 10; ++t) {
    for (int n = 0; n < 2; ++n) CHECK(xa.sample(t, n).values() == xb.sample(t, n).values());
  }
}

TEST_CASE("change points must sit strictly inside the series") {
  CHECK_THROWS_AS(gen_network_path({3}, 10, {{0}}, 0.25, {-3.0, 3.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_network_path({3}, 10, {{10}}, 0.25, {-3.0, 3.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_network_path({3}, 10, {{3, 3}}, 0.25, {-3.0, 3.0}, 1), std::invalid_argument);
}

TEST_CASE("identity truth samples standard normal entries") {
  GroundTruth truth;
  truth.networks.nets.assign(1, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
  truth.change_points = {{}, {}};
  const TensorSeries x = sample_series(truth, 10000, 77);
  double mean = 0.0, var = 0.0;
  const double count = 10000.0 * 4.0;
  for (int n = 0; n < 10000; ++n) {
    for (std::int64_t i = 0; i < 4; ++i) {
      mean += x.sample(0, n)[i];
      var += x.sample(0, n)[i] * x.sample(0, n)[i];
    }
  }
  mean /= count;
  var = var / count - mean * mean;
  CHECK(std::abs(mean) <= 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("flattened sample covariance approaches the inverse Kronecker precision") {
  Rng rng(204);
  GroundTruth truth;
  truth.networks.nets.assign(1, {test::random_spd(2, rng), test::random_spd(2, rng)});
  truth.change_points = {{}, {}};
  const TensorSeries x = sample_series(truth, 100000, 78);
  Matrix emp = Matrix::Zero(4, 4);
  for (int n = 0; n < 100000; ++n) {
    const auto v = x.sample(0, n).vec();
    emp += v * v.transpose();
  }
  emp /= 100000.0;
  const Matrix expected = kron_list(truth.networks.nets[0]).inverse();
  CHECK((emp - expected).norm() / expected.norm() <= 0.02);
}

TEST_CASE("one-mode sampling is plain multivariate normal") {
  Rng rng(205);
  GroundTruth truth;
  truth.networks.nets.assign(1, {test::random_spd(3, rng)});
  truth.change_points = {{}};
  const TensorSeries x = sample_series(truth, 60000, 79);
  Matrix emp = Matrix::Zero(3, 3);
  for (int n = 0; n < 60000; ++n) {
    const auto v = x.sample(0, n).vec();
    emp += v * v.transpose();
  }
  emp /= 60000.0;
  const Matrix expected = truth.networks.nets[0][0].inverse();
  CHECK((emp - expected).norm() / expected.norm() <= 0.03);
}

TEST_CASE("perfectly separated scores maximize every metric") {
  const std::vector<double> scores{0.9, 0.1};
  const std::vector<int> labels{1, 0};
  CHECK(auc_roc(scores, labels) == doctest::Approx(1.0));
  CHECK(auc_pr(scores, labels) == doctest::Approx(1.0));
  CHECK(best_f1(scores, labels) == doctest::Approx(1.0));
}

TEST_CASE("inverted scores give zero AUC-ROC") {
  const std::vector<double> scores{0.1, 0.9};
  const std::vector<int> labels{1, 0};
  CHECK(auc_roc(scores, labels) == doctest::Approx(0.0));
}

TEST_CASE("four-point example matches hand-computed values") {
  const std::vector<double> scores{0.8, 0.6, 0.4, 0.2};
  const std::vector<int> labels{1, 0, 1, 0};
  CHECK(auc_roc(scores, labels) == doctest::Approx(0.75));
  CHECK(auc_pr(scores, labels) == doctest::Approx(5.0 / 6.0));
  CHECK(best_f1(scores, labels) == doctest::Approx(0.8));
}

TEST_CASE("metrics agree exactly with exhaustive threshold enumeration") {
  Rng rng(206);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 5 + static_cast<int>(rng.next_u64() % 46);
    std::vector<double> scores;
    std::vector<int> labels;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Quantized scores force plenty of ties.
      scores.push_back(std::round(rng.uniform() * 8.0) / 8.0);
      labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
      has_pos = has_pos || labels.back() == 1;
      has_neg = has_neg || labels.back() == 0;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(auc_roc(scores, labels) == doctest::Approx(pair_count_auc(scores, labels)).epsilon(1e-12));
    const auto [ap, f1] = exhaustive_pr_and_f1(scores, labels);
    CHECK(auc_pr(scores, labels) == doctest::Approx(ap).epsilon(1e-12));
    CHECK(best_f1(scores, labels) == doctest::Approx(f1).epsilon(1e-12));
  }
}

TEST_CASE("AUC-ROC is invariant under strictly increasing transforms") {
  Rng rng(207);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    scores.push_back(rng.uniform(-2.0, 2.0));
    labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;
  std::vector<double> transformed;
  for (double s : scores) transformed.push_back(s * s * s + 2.0 * s);
  CHECK(auc_roc(scores, labels) == doctest::Approx(auc_roc(transformed, labels)).epsilon(1e-14));
}

TEST_CASE("degenerate labels are rejected") {
  const std::vector<double> scores{0.4, 0.6};
  CHECK_THROWS_AS(auc_roc(scores, std::vector<int>{1, 1}), DataError);
  CHECK_THROWS_AS(auc_pr(scores, std::vector<int>{0, 0}), DataError);
}

TEST_CASE("temporal deviation is zero exactly on constant segments") {
  Rng rng(208);
  const Matrix a = test::random_spd(3, rng);
  const Matrix b = test::random_spd(3, rng);
  const MatrixPath path{a, a, a, b, b};
  const auto td = temporal_deviation(path);
  CHECK(td.size() == 4);
  CHECK(td[0] == 0.0);
  CHECK(td[1] == 0.0);
  CHECK(td[2] > 0.0);
  CHECK(td[3] == 0.0);
}

TEST_CASE("TDR of a constant path is an explicit error") {
  Rng rng(209);
  const Matrix a = test::random_spd(3, rng);
  const MatrixPath path(6, a);
  const std::vector<int> changes{3};
  CHECK_THROWS_AS(tdr(path, changes), DataError);
  CHECK_THROWS_AS(tdr(path, std::vector<int>{}), DataError);
}

TEST_CASE("a single jump in ten steps gives TDR nine") {
  Rng rng(210);
  const Matrix a = test::random_spd(3, rng);
  Matrix b = a;
  b(0, 1) += 1.0;
  b(1, 0) += 1.0;
  MatrixPath path;
  for (int t = 0; t < 10; ++t) path.push_back(t < 4 ? a : b);
  const std::vector<int> changes{4};
  CHECK(tdr(path, changes) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("scoring the truth against itself is perfect") {
  const GroundTruth truth = gen_network_path({4, 4}, 12, {{6}, {}}, 0.4, {-2.0, 2.0}, 300);
  const EvalOptions options;
  const MetricReport report = evaluate_networks(truth.networks, truth, options);
  for (const auto& mode : report.per_mode) {
    REQUIRE(mode.auc_roc.has_value());
    CHECK(*mode.auc_roc == doctest::Approx(1.0));
  }
}

TEST_CASE("random scores hover near one half AUC") {
  Rng rng(211);
  const GroundTruth truth = gen_network_path({5, 5}, 20, {{10}, {}}, 0.3, {-2.0, 2.0}, 301);
  double mean_auc = 0.0;
  const int trials = 20;
  for (int rep = 0; rep < trials; ++rep) {
    MultiNetworkPath noise = truth.networks;
    for (auto& step : noise.nets) {
      for (auto& net : step) net = test::random_symmetric(static_cast<int>(net.rows()), rng);
    }
    const MetricReport report = evaluate_networks(noise, truth, EvalOptions{});
    mean_auc += *report.summary.auc_roc;
  }
  mean_auc /= static_cast<double>(trials);
  CHECK(std::abs(mean_auc - 0.5) <= 0.05);
}

TEST_CASE("edge scoring never touches the diagonal") {
  const GroundTruth truth = gen_network_path({4}, 3, {{}}, 0.5, {-2.0, 2.0}, 302);
  const EdgeScores scores = score_edges_mode(truth.networks, truth.networks, 0);
  CHECK(scores.scores.size() == 3 * 6);  // T * d(d-1)/2 upper-triangle pairs only
}

TEST_CASE("flattened scoring uses the Kronecker truth under the cap") {
  Rng rng(212);
  const GroundTruth truth = gen_network_path({3, 3}, 4, {{2}, {}}, 0.4, {-2.0, 2.0}, 303);
  MatrixPath flat_est;
  for (int t = 0; t < 4; ++t) flat_est.push_back(kron_list(truth.networks.nets[static_cast<std::size_t>(t)]));
  const EdgeScores scores = score_edges_flattened(flat_est, truth.networks);
  CHECK(auc_roc(scores.scores, scores.labels) == doctest::Approx(1.0));
  EvalOptions small_cap;
  small_cap.kron_cap = 4;
  CHECK_THROWS_AS(evaluate_flattened(flat_est, truth, small_cap), std::invalid_argument);
}

TEST_CASE("per-time pooling averages step-wise metrics") {
  const GroundTruth truth = gen_network_path({4, 4}, 6, {{3}, {}}, 0.4, {-2.0, 2.0}, 304);
  EvalOptions options;
  options.pooling = Pooling::kPerTime;
  const MetricReport report = evaluate_networks(truth.networks, truth, options);
  for (const auto& mode : report.per_mode) {
    if (mode.auc_roc) CHECK(*mode.auc_roc == doctest::Approx(1.0));
  }
}

TEST_SUITE_END();
