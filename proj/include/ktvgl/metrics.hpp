#pragma once

#include "ktvgl/benchmark.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ktvgl {

// Rank-statistic AUC-ROC with tied scores averaged. Labels must contain at
// least one positive and one negative.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

// Average precision (step sum over recall increments, no interpolation).
double auc_pr(std::span<const double> scores, std::span<const int> labels);

// Maximum F1 over thresholds placed at the unique score values.
double best_f1(std::span<const double> scores, std::span<const int> labels);

// ||Theta_t - Theta_{t-1}||_F / ||Theta_t||_F for t = 1..T-1.
std::vector<double> temporal_deviation(const MatrixPath& path);

// Mean temporal deviation at the change points over the mean across all
// steps. Change points are 0-based first-new-step indices in [1, T-1].
double tdr(const MatrixPath& path, std::span<const int> change_points);

struct EdgeScores {
  std::vector<double> scores;  // |estimated off-diagonal|
  std::vector<int> labels;     // 1 iff the true off-diagonal entry is nonzero
};

// Pools (t, i<j) pairs for one mode. When the estimate has a single step and
// the truth has several, the static estimate is broadcast across time.
EdgeScores score_edges_mode(const MultiNetworkPath& estimate, const MultiNetworkPath& truth, int mode);

// Flattened scope: the truth precision is materialized via kron_list (subject
// to the cap) and compared against a one-mode estimate path.
EdgeScores score_edges_flattened(const MatrixPath& estimate, const MultiNetworkPath& truth,
                                 std::int64_t cap = kDefaultKronCap);

enum class Pooling { kPooled, kPerTime };

struct MetricValues {
  std::optional<double> auc_roc;
  std::optional<double> auc_pr;
  std::optional<double> best_f1;
  std::optional<double> tdr;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

struct MetricReport {
  std::vector<MetricValues> per_mode;
  MetricValues summary;  // metric means across modes; counts summed
  Pooling pooling = Pooling::kPooled;
};

struct EvalOptions {
  bool want_auc_roc = true;
  bool want_auc_pr = true;
  bool want_best_f1 = true;
  bool want_tdr = false;
  Pooling pooling = Pooling::kPooled;
  std::int64_t kron_cap = kDefaultKronCap;
};

// Mode-wise evaluation of a multi-network estimate against ground truth.
MetricReport evaluate_networks(const MultiNetworkPath& estimate, const GroundTruth& truth,
                               const EvalOptions& options);

// Flattened evaluation (single report entry) for one-mode estimates.
MetricReport evaluate_flattened(const MatrixPath& estimate, const GroundTruth& truth,
                                const EvalOptions& options);

}  // namespace ktvgl
