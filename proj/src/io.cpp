#include "ktvgl/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace ktvgl {

using nlohmann::json;

namespace {

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // fixed '\n' endings on every platform
  if (!out) throw DataError("cannot write " + path);
  return out;
}

json read_header(std::istream& in, const std::string& path, const std::string& kind) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(path + ": bad header: " + e.what());
  }
  if (header.value("kind", "") != kind) {
    throw DataError(path + ": expected a " + kind + " file, got kind '" + header.value("kind", "?") + "'");
  }
  if (header.value("schema_version", 0) != 1) throw DataError(path + ": unsupported schema version");
  return header;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

double parse_double(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw DataError(path + ": bad numeric field '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw DataError(path + ": bad integer field '" + s + "'");
  return v;
}

json labels_to_json(const SeriesLabels& labels) {
  json j = json::object();
  if (!labels.mode_labels.empty()) j["mode_labels"] = labels.mode_labels;
  if (!labels.time_labels.empty()) j["time_labels"] = labels.time_labels;
  return j;
}

SeriesLabels labels_from_json(const json& header) {
  SeriesLabels labels;
  if (header.contains("mode_labels")) {
    labels.mode_labels = header["mode_labels"].get<std::vector<std::vector<std::string>>>();
  }
  if (header.contains("time_labels")) {
    labels.time_labels = header["time_labels"].get<std::vector<std::string>>();
  }
  return labels;
}

}  // namespace

PenaltyKind penalty_kind_from_name(const std::string& name) {
  if (name == "laplacian") return PenaltyKind::kLaplacian;
  if (name == "l1") return PenaltyKind::kL1;
  throw DataError("unknown penalty kind '" + name + "' (expected laplacian or l1)");
}

std::string penalty_kind_name(PenaltyKind kind) {
  return kind == PenaltyKind::kLaplacian ? "laplacian" : "l1";
}

void write_series(const std::string& path, const TensorSeries& x, const SeriesLabels& labels) {
  std::ofstream out = open_for_write(path);
  json header = labels_to_json(labels);
  header["kind"] = "series";
  header["schema_version"] = 1;
  std::vector<int> shape{x.num_steps()};
  shape.insert(shape.end(), x.shape().begin(), x.shape().end());
  header["shape"] = shape;
  std::vector<int> per_step;
  per_step.reserve(static_cast<std::size_t>(x.num_steps()));
  for (int t = 0; t < x.num_steps(); ++t) per_step.push_back(x.num_samples(t));
  header["samples_per_step"] = per_step;
  out << header.dump() << '\n';

  const int order = x.order();
  std::vector<int> idx(static_cast<std::size_t>(order));
  for (int t = 0; t < x.num_steps(); ++t) {
    for (int n = 0; n < x.num_samples(t); ++n) {
      const DenseTensor& sample = x.sample(t, n);
      std::fill(idx.begin(), idx.end(), 0);
      for (std::int64_t linear = 0; linear < sample.size(); ++linear) {
        out << t << ' ' << n;
        for (int m = 0; m < order; ++m) out << ' ' << idx[static_cast<std::size_t>(m)];
        out << ' ' << format_double(sample[linear]) << '\n';
        for (int m = order - 1; m >= 0; --m) {
          if (++idx[static_cast<std::size_t>(m)] < x.shape()[static_cast<std::size_t>(m)]) break;
          idx[static_cast<std::size_t>(m)] = 0;
        }
      }
    }
  }
  if (!out) throw DataError("failed while writing " + path);
}

SeriesData read_series(const std::string& path) {
  std::ifstream in = open_for_read(path);
  const json header = read_header(in, path, "series");

  const auto shape_full = header.at("shape").get<std::vector<int>>();
  if (shape_full.size() < 2) throw DataError(path + ": shape needs T plus at least one mode");
  const int T = shape_full.front();
  const std::vector<int> shape(shape_full.begin() + 1, shape_full.end());
  const std::int64_t entries = shape_size(shape);
  const auto per_step = header.at("samples_per_step").get<std::vector<int>>();
  if (static_cast<int>(per_step.size()) != T) throw DataError(path + ": samples_per_step length mismatch");

  std::vector<std::vector<DenseTensor>> samples(static_cast<std::size_t>(T));
  std::vector<std::vector<std::vector<bool>>> seen(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    if (per_step[static_cast<std::size_t>(t)] < 1) throw DataError(path + ": samples_per_step must be >= 1");
    samples[static_cast<std::size_t>(t)].assign(static_cast<std::size_t>(per_step[static_cast<std::size_t>(t)]),
                                                DenseTensor(shape));
    seen[static_cast<std::size_t>(t)].assign(static_cast<std::size_t>(per_step[static_cast<std::size_t>(t)]),
                                             std::vector<bool>(static_cast<std::size_t>(entries), false));
  }

  const int order = static_cast<int>(shape.size());
  std::string line;
  std::vector<int> idx(static_cast<std::size_t>(order));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != order + 3) throw DataError(path + ": malformed record '" + line + "'");
    const long t = parse_long(fields[0], path);
    const long n = parse_long(fields[1], path);
    if (t < 0 || t >= T) throw DataError(path + ": time index out of range");
    if (n < 0 || n >= per_step[static_cast<std::size_t>(t)]) throw DataError(path + ": sample index out of range");
    for (int m = 0; m < order; ++m) {
      idx[static_cast<std::size_t>(m)] = static_cast<int>(parse_long(fields[static_cast<std::size_t>(m) + 2], path));
    }
    const double v = parse_double(fields.back(), path);
    if (!std::isfinite(v)) throw DataError(path + ": non-finite value");
    DenseTensor& sample = samples[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)];
    const std::int64_t linear = sample.linear_index(idx);
    auto& sample_seen = seen[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)];
    if (sample_seen[static_cast<std::size_t>(linear)]) {
      throw DataError(path + ": duplicate record for the same entry");
    }
    sample_seen[static_cast<std::size_t>(linear)] = true;
    sample[linear] = v;
  }
  for (int t = 0; t < T; ++t) {
    for (int n = 0; n < per_step[static_cast<std::size_t>(t)]; ++n) {
      const auto& flags = seen[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)];
      for (std::int64_t k = 0; k < entries; ++k) {
        if (!flags[static_cast<std::size_t>(k)]) {
          throw DataError(path + ": incomplete sample block at t=" + std::to_string(t));
        }
      }
    }
  }
  return SeriesData{TensorSeries(shape, std::move(samples)), labels_from_json(header)};
}

namespace {

// (t, mode, i, j, value) records shared by truth and fit files.
void write_network_records(std::ostream& out, const MultiNetworkPath& nets) {
  for (int t = 0; t < nets.num_steps(); ++t) {
    for (int m = 0; m < nets.num_modes(); ++m) {
      const Matrix& mat = nets.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
      for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
          out << t << ' ' << m << ' ' << i << ' ' << j << ' ' << format_double(mat(i, j)) << '\n';
        }
      }
    }
  }
}

MultiNetworkPath read_network_records(std::istream& in, const std::string& path, int T,
                                      const std::vector<int>& dims) {
  MultiNetworkPath nets;
  nets.nets.resize(static_cast<std::size_t>(T));
  for (auto& step : nets.nets) {
    for (int d : dims) step.push_back(Matrix::Constant(d, d, std::numeric_limits<double>::quiet_NaN()));
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 5) throw DataError(path + ": malformed record '" + line + "'");
    const long t = parse_long(fields[0], path);
    const long m = parse_long(fields[1], path);
    const long i = parse_long(fields[2], path);
    const long j = parse_long(fields[3], path);
    const double v = parse_double(fields[4], path);
    if (t < 0 || t >= T || m < 0 || m >= static_cast<long>(dims.size())) {
      throw DataError(path + ": record index out of range");
    }
    Matrix& mat = nets.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
    if (i < 0 || i >= mat.rows() || j < 0 || j >= mat.cols()) {
      throw DataError(path + ": matrix index out of range");
    }
    mat(i, j) = v;
  }
  for (const auto& step : nets.nets) {
    for (const Matrix& mat : step) {
      if (!mat.allFinite()) throw DataError(path + ": incomplete or non-finite matrix records");
    }
  }
  return nets;
}

std::vector<int> dims_of(const MultiNetworkPath& nets) {
  std::vector<int> dims;
  for (const Matrix& m : nets.nets.front()) dims.push_back(static_cast<int>(m.rows()));
  return dims;
}

}  // namespace

void write_truth(const std::string& path, const GroundTruth& truth) {
  std::ofstream out = open_for_write(path);
  json header;
  header["kind"] = "truth";
  header["schema_version"] = 1;
  header["T"] = truth.networks.num_steps();
  header["dims"] = dims_of(truth.networks);
  header["change_points"] = truth.change_points;
  header["seed"] = truth.seed;
  header["edge_prob"] = truth.edge_prob;
  header["value_range"] = {truth.value_range.first, truth.value_range.second};
  out << header.dump() << '\n';
  write_network_records(out, truth.networks);
  if (!out) throw DataError("failed while writing " + path);
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream in = open_for_read(path);
  const json header = read_header(in, path, "truth");
  const int T = header.at("T").get<int>();
  const auto dims = header.at("dims").get<std::vector<int>>();
  GroundTruth truth;
  truth.change_points = header.at("change_points").get<std::vector<std::vector<int>>>();
  truth.seed = header.at("seed").get<std::uint64_t>();
  truth.edge_prob = header.at("edge_prob").get<double>();
  const auto range = header.at("value_range").get<std::vector<double>>();
  if (range.size() != 2) throw DataError(path + ": bad value_range");
  truth.value_range = {range[0], range[1]};
  truth.networks = read_network_records(in, path, T, dims);
  if (truth.change_points.size() != dims.size()) throw DataError(path + ": change_points length mismatch");
  return truth;
}

void write_fit(const std::string& path, const FitData& fit) {
  std::ofstream out = open_for_write(path);
  json header = labels_to_json(fit.info.labels);
  header["kind"] = "fit";
  header["schema_version"] = 1;
  header["variant"] = fit.info.variant;
  header["input"] = fit.info.input;
  header["dims"] = fit.info.dims;
  header["T"] = fit.info.T;
  header["lambda"] = fit.info.lambdas;
  header["rho"] = fit.info.rhos;
  header["psi"] = fit.info.psis;
  header["eta"] = fit.info.eta;
  header["eps_abs"] = fit.info.eps_abs;
  header["eps_rel"] = fit.info.eps_rel;
  header["max_admm_iters"] = fit.info.max_admm_iters;
  header["max_outer_sweeps"] = fit.info.max_outer_sweeps;
  header["outer_tol"] = fit.info.outer_tol;
  if (fit.info.window > 0) header["window"] = fit.info.window;
  header["normalized_report"] = fit.info.normalized_report;
  header["diagnostics"] = {
      {"sweeps", fit.info.sweeps}, {"objectives", fit.info.objectives}, {"converged", fit.info.converged}};
  out << header.dump() << '\n';
  write_network_records(out, fit.networks);
  if (!out) throw DataError("failed while writing " + path);
}

FitData read_fit(const std::string& path) {
  std::ifstream in = open_for_read(path);
  const json header = read_header(in, path, "fit");
  FitInfo info;
  info.variant = header.at("variant").get<std::string>();
  info.input = header.value("input", "");
  info.dims = header.at("dims").get<std::vector<int>>();
  info.T = header.at("T").get<int>();
  info.lambdas = header.at("lambda").get<std::vector<double>>();
  info.rhos = header.at("rho").get<std::vector<double>>();
  info.psis = header.at("psi").get<std::vector<std::string>>();
  info.eta = header.at("eta").get<double>();
  info.eps_abs = header.at("eps_abs").get<double>();
  info.eps_rel = header.at("eps_rel").get<double>();
  info.max_admm_iters = header.at("max_admm_iters").get<int>();
  info.max_outer_sweeps = header.at("max_outer_sweeps").get<int>();
  info.outer_tol = header.at("outer_tol").get<double>();
  info.window = header.value("window", 0);
  info.normalized_report = header.value("normalized_report", false);
  if (header.contains("diagnostics")) {
    const json& d = header["diagnostics"];
    info.sweeps = d.value("sweeps", 0);
    if (d.contains("objectives")) info.objectives = d["objectives"].get<std::vector<double>>();
    info.converged = d.value("converged", true);
  }
  info.labels = labels_from_json(header);
  FitData fit{std::move(info), read_network_records(in, path, header.at("T").get<int>(),
                                                    header.at("dims").get<std::vector<int>>())};
  return fit;
}

void write_timings(const std::string& path, const std::vector<double>& seconds) {
  std::ofstream out = open_for_write(path);
  json header;
  header["kind"] = "timings";
  header["schema_version"] = 1;
  header["count"] = seconds.size();
  out << header.dump() << '\n';
  for (double s : seconds) out << format_double(s) << '\n';
  if (!out) throw DataError("failed while writing " + path);
}

std::vector<double> read_timings(const std::string& path) {
  std::ifstream in = open_for_read(path);
  read_header(in, path, "timings");
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_double(line, path));
  }
  return out;
}

namespace {

json metric_values_to_json(const MetricValues& v) {
  json j;
  j["positives"] = v.positives;
  j["negatives"] = v.negatives;
  auto put = [&](const char* name, const std::optional<double>& value) {
    if (value) {
      j[name] = *value;
    } else {
      j[name] = nullptr;
    }
  };
  put("auc_roc", v.auc_roc);
  put("auc_pr", v.auc_pr);
  put("best_f1", v.best_f1);
  put("tdr", v.tdr);
  return j;
}

}  // namespace

std::string metric_report_to_json(const MetricReport& report) {
  json j;
  j["pooling"] = report.pooling == Pooling::kPooled ? "pooled" : "per-time";
  json modes = json::array();
  for (std::size_t m = 0; m < report.per_mode.size(); ++m) {
    json entry = metric_values_to_json(report.per_mode[m]);
    entry["mode"] = m;
    modes.push_back(std::move(entry));
  }
  j["per_mode"] = std::move(modes);
  j["summary"] = metric_values_to_json(report.summary);
  return j.dump(2);
}

}  // namespace ktvgl
