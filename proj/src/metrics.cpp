#include "ktvgl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ktvgl {

namespace {

struct Counts {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

Counts validate_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  if (scores.empty()) throw std::invalid_argument("empty score set");
  Counts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("scores must be finite");
    if (labels[i] == 1) {
      ++c.positives;
    } else if (labels[i] == 0) {
      ++c.negatives;
    } else {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
  if (c.positives == 0 || c.negatives == 0) throw DataError("labels are all one class");
  return c;
}

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

// Walks thresholds at the unique score values (descending) and reports the
// confusion counts after each group of tied scores.
template <typename Visit>
void sweep_thresholds(std::span<const double> scores, std::span<const int> labels, Visit&& visit) {
  const auto idx = order_by_score_desc(scores);
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++j;
    }
    visit(tp, fp);
    i = j;
  }
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = validate_scores(scores, labels);
  // Average rank of the positives (ascending score, ties share their mean rank).
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::int64_t pos_in_group = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]] == 1) ++pos_in_group;
      ++j;
    }
    const double mean_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    rank_sum_pos += mean_rank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double p = static_cast<double>(c.positives);
  const double n = static_cast<double>(c.negatives);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);
}

double auc_pr(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = validate_scores(scores, labels);
  double ap = 0.0;
  double prev_recall = 0.0;
  sweep_thresholds(scores, labels, [&](std::int64_t tp, std::int64_t fp) {
    const double recall = static_cast<double>(tp) / static_cast<double>(c.positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  });
  return ap;
}

double best_f1(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = validate_scores(scores, labels);
  double best = 0.0;
  sweep_thresholds(scores, labels, [&](std::int64_t tp, std::int64_t fp) {
    const double denom = static_cast<double>(2 * tp + fp + (c.positives - tp));
    if (denom > 0.0) best = std::max(best, 2.0 * static_cast<double>(tp) / denom);
  });
  return best;
}

std::vector<double> temporal_deviation(const MatrixPath& path) {
  if (path.size() < 2) throw std::invalid_argument("temporal deviation needs at least two steps");
  std::vector<double> td;
  td.reserve(path.size() - 1);
  for (std::size_t t = 1; t < path.size(); ++t) {
    const double denom = path[t].norm();
    if (denom == 0.0) throw DataError("temporal deviation undefined for a zero matrix");
    td.push_back((path[t] - path[t - 1]).norm() / denom);
  }
  return td;
}

double tdr(const MatrixPath& path, std::span<const int> change_points) {
  if (change_points.empty()) throw DataError("TDR needs at least one change point");
  const std::vector<double> td = temporal_deviation(path);
  double at_changes = 0.0;
  for (int c : change_points) {
    if (c < 1 || c >= static_cast<int>(path.size())) {
      throw std::invalid_argument("change point outside the series");
    }
    at_changes += td[static_cast<std::size_t>(c - 1)];
  }
  at_changes /= static_cast<double>(change_points.size());
  const double overall = std::accumulate(td.begin(), td.end(), 0.0) / static_cast<double>(td.size());
  if (overall == 0.0) throw DataError("TDR undefined: temporal deviation is identically zero");
  return at_changes / overall;
}

namespace {

void collect_offdiag(const Matrix& est, const Matrix& tru, EdgeScores& out) {
  for (Eigen::Index i = 0; i < est.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < est.cols(); ++j) {
      out.scores.push_back(std::abs(est(i, j)));
      out.labels.push_back(tru(i, j) != 0.0 ? 1 : 0);
    }
  }
}

const Matrix& estimate_at(const MultiNetworkPath& estimate, int t, int mode) {
  const int step = estimate.num_steps() == 1 ? 0 : t;
  return estimate.nets[static_cast<std::size_t>(step)][static_cast<std::size_t>(mode)];
}

}  // namespace

EdgeScores score_edges_mode(const MultiNetworkPath& estimate, const MultiNetworkPath& truth, int mode) {
  if (mode < 0 || mode >= truth.num_modes()) throw std::invalid_argument("mode out of range");
  if (estimate.num_modes() != truth.num_modes()) throw DataError("estimate/truth mode count mismatch");
  if (estimate.num_steps() != truth.num_steps() && estimate.num_steps() != 1) {
    throw DataError("estimate/truth length mismatch");
  }
  EdgeScores out;
  for (int t = 0; t < truth.num_steps(); ++t) {
    const Matrix& est = estimate_at(estimate, t, mode);
    const Matrix& tru = truth.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(mode)];
    if (est.rows() != tru.rows()) throw DataError("estimate/truth dimension mismatch");
    collect_offdiag(est, tru, out);
  }
  return out;
}

EdgeScores score_edges_flattened(const MatrixPath& estimate, const MultiNetworkPath& truth,
                                 std::int64_t cap) {
  if (estimate.size() != static_cast<std::size_t>(truth.num_steps()) && estimate.size() != 1) {
    throw DataError("estimate/truth length mismatch");
  }
  EdgeScores out;
  for (int t = 0; t < truth.num_steps(); ++t) {
    const Matrix k = kron_list(truth.nets[static_cast<std::size_t>(t)], cap);
    const Matrix& est = estimate.size() == 1 ? estimate.front() : estimate[static_cast<std::size_t>(t)];
    if (est.rows() != k.rows()) throw DataError("flattened estimate dimension mismatch");
    collect_offdiag(est, k, out);
  }
  return out;
}

namespace {

bool degenerate(const EdgeScores& s) {
  const bool any_pos = std::find(s.labels.begin(), s.labels.end(), 1) != s.labels.end();
  const bool any_neg = std::find(s.labels.begin(), s.labels.end(), 0) != s.labels.end();
  return !(any_pos && any_neg);
}

// Applies one metric either to the pooled scores or averaged over per-step
// score sets, skipping steps where the labels are all one class.
template <typename Metric>
std::optional<double> apply_metric(const EdgeScores& pooled, const std::vector<EdgeScores>& per_step,
                                   Pooling pooling, Metric&& metric) {
  if (pooling == Pooling::kPooled) {
    if (degenerate(pooled)) return std::nullopt;
    return metric(pooled);
  }
  double sum = 0.0;
  int used = 0;
  for (const EdgeScores& s : per_step) {
    if (degenerate(s)) continue;
    sum += metric(s);
    ++used;
  }
  if (used == 0) return std::nullopt;
  return sum / static_cast<double>(used);
}

MetricValues metrics_for_scores(const EdgeScores& pooled, const std::vector<EdgeScores>& per_step,
                                const EvalOptions& options) {
  MetricValues v;
  for (int label : pooled.labels) {
    if (label == 1) {
      ++v.positives;
    } else {
      ++v.negatives;
    }
  }
  const auto roc = [](const EdgeScores& s) { return auc_roc(s.scores, s.labels); };
  const auto pr = [](const EdgeScores& s) { return auc_pr(s.scores, s.labels); };
  const auto f1 = [](const EdgeScores& s) { return best_f1(s.scores, s.labels); };
  if (options.want_auc_roc) v.auc_roc = apply_metric(pooled, per_step, options.pooling, roc);
  if (options.want_auc_pr) v.auc_pr = apply_metric(pooled, per_step, options.pooling, pr);
  if (options.want_best_f1) v.best_f1 = apply_metric(pooled, per_step, options.pooling, f1);
  return v;
}

void finish_summary(MetricReport& report) {
  auto mean_of = [&](auto field) -> std::optional<double> {
    double sum = 0.0;
    int used = 0;
    for (const MetricValues& v : report.per_mode) {
      if (v.*field) {
        sum += *(v.*field);
        ++used;
      }
    }
    if (used == 0) return std::nullopt;
    return sum / static_cast<double>(used);
  };
  report.summary.auc_roc = mean_of(&MetricValues::auc_roc);
  report.summary.auc_pr = mean_of(&MetricValues::auc_pr);
  report.summary.best_f1 = mean_of(&MetricValues::best_f1);
  report.summary.tdr = mean_of(&MetricValues::tdr);
  for (const MetricValues& v : report.per_mode) {
    report.summary.positives += v.positives;
    report.summary.negatives += v.negatives;
  }
}

}  // namespace

MetricReport evaluate_networks(const MultiNetworkPath& estimate, const GroundTruth& truth,
                               const EvalOptions& options) {
  MetricReport report;
  report.pooling = options.pooling;
  const int modes = truth.networks.num_modes();
  for (int m = 0; m < modes; ++m) {
    EdgeScores pooled = score_edges_mode(estimate, truth.networks, m);
    std::vector<EdgeScores> per_step;
    if (options.pooling == Pooling::kPerTime) {
      for (int t = 0; t < truth.networks.num_steps(); ++t) {
        EdgeScores s;
        collect_offdiag(estimate_at(estimate, t, m),
                        truth.networks.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)], s);
        per_step.push_back(std::move(s));
      }
    }
    MetricValues v = metrics_for_scores(pooled, per_step, options);
    if (options.want_tdr) {
      const auto& cps = truth.change_points.at(static_cast<std::size_t>(m));
      if (cps.empty()) throw DataError("TDR requested but the truth has no change points for mode " +
                                       std::to_string(m));
      if (estimate.num_steps() == 1) {
        throw DataError("TDR requested for a static (single-step) estimate");
      }
      v.tdr = tdr(estimate.mode_path(m), cps);
    }
    report.per_mode.push_back(std::move(v));
  }
  finish_summary(report);
  return report;
}

MetricReport evaluate_flattened(const MatrixPath& estimate, const GroundTruth& truth,
                                const EvalOptions& options) {
  MetricReport report;
  report.pooling = options.pooling;
  EdgeScores pooled = score_edges_flattened(estimate, truth.networks, options.kron_cap);
  std::vector<EdgeScores> per_step;
  if (options.pooling == Pooling::kPerTime) {
    for (int t = 0; t < truth.networks.num_steps(); ++t) {
      const Matrix k = kron_list(truth.networks.nets[static_cast<std::size_t>(t)], options.kron_cap);
      const Matrix& est = estimate.size() == 1 ? estimate.front() : estimate[static_cast<std::size_t>(t)];
      EdgeScores s;
      collect_offdiag(est, k, s);
      per_step.push_back(std::move(s));
    }
  }
  MetricValues v = metrics_for_scores(pooled, per_step, options);
  if (options.want_tdr) {
    // Union of the per-mode change sets: a flattened network changes when any
    // mode changes.
    std::vector<int> all_changes;
    for (const auto& cps : truth.change_points) all_changes.insert(all_changes.end(), cps.begin(), cps.end());
    std::sort(all_changes.begin(), all_changes.end());
    all_changes.erase(std::unique(all_changes.begin(), all_changes.end()), all_changes.end());
    if (all_changes.empty()) throw DataError("TDR requested but the truth has no change points");
    if (estimate.size() == 1) throw DataError("TDR requested for a static (single-step) estimate");
    v.tdr = tdr(estimate, all_changes);
  }
  report.per_mode.push_back(std::move(v));
  finish_summary(report);
  return report;
}

}  // namespace ktvgl
