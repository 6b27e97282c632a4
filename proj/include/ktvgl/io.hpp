#pragma once

#include "ktvgl/benchmark.hpp"
#include "ktvgl/metrics.hpp"

#include <string>
#include <vector>

namespace ktvgl {

// Optional human-readable names carried alongside a series and passed
// through to fits and graph exports.
struct SeriesLabels {
  std::vector<std::vector<std::string>> mode_labels;  // one list per mode, or empty
  std::vector<std::string> time_labels;               // one per step, or empty

  bool empty() const { return mode_labels.empty() && time_labels.empty(); }
};

struct SeriesData {
  TensorSeries series;
  SeriesLabels labels;
};

// Config echo + diagnostics stored with every fit; enough to re-run the
// command bit-identically.
struct FitInfo {
  std::string variant = "ktvgl";  // ktvgl | flatten | static | stream
  std::string input;              // input series path as given on the command line
  std::vector<int> dims;          // factor dimensions (flatten: one entry, the product)
  int T = 0;
  std::vector<double> lambdas;
  std::vector<double> rhos;
  std::vector<std::string> psis;  // "laplacian" or "l1" per mode
  double eta = 1.0;
  double eps_abs = 1e-5;
  double eps_rel = 1e-4;
  int max_admm_iters = 2000;
  int max_outer_sweeps = 10;
  double outer_tol = 1e-4;
  int window = 0;  // stream runs only
  bool normalized_report = false;
  int sweeps = 0;
  std::vector<double> objectives;
  bool converged = true;
  SeriesLabels labels;
};

struct FitData {
  FitInfo info;
  MultiNetworkPath networks;
};

// All files share the same shape: one JSON header line, then plain text
// records (one per line, zero-based indices).

void write_series(const std::string& path, const TensorSeries& x, const SeriesLabels& labels = {});
SeriesData read_series(const std::string& path);

void write_truth(const std::string& path, const GroundTruth& truth);
GroundTruth read_truth(const std::string& path);

void write_fit(const std::string& path, const FitData& fit);
FitData read_fit(const std::string& path);

// Per-push wall times for stream runs; kept out of the fit file so fit
// outputs stay byte-identical across runs.
void write_timings(const std::string& path, const std::vector<double>& seconds);
std::vector<double> read_timings(const std::string& path);

std::string metric_report_to_json(const MetricReport& report);

PenaltyKind penalty_kind_from_name(const std::string& name);
std::string penalty_kind_name(PenaltyKind kind);

}  // namespace ktvgl
