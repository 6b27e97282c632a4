#include "ktvgl/cli.hpp"

#include "ktvgl/graph_export.hpp"
#include "ktvgl/io.hpp"
#include "ktvgl/prep.hpp"
#include "ktvgl/stream.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

namespace ktvgl {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream ss(text);
  while (std::getline(ss, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const std::string& part : split_on(text, ',')) {
    if (part.empty()) throw UsageError(flag + ": empty list entry");
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse '" + part + "' as a number");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (const std::string& part : split_on(text, ',')) {
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse '" + part + "' as an integer");
    }
  }
  return out;
}

// Broadcasts a one-element list to the mode count; otherwise requires an
// exact match.
template <typename T>
std::vector<T> per_mode(std::vector<T> values, int modes, const std::string& flag) {
  if (static_cast<int>(values.size()) == modes) return values;
  if (values.size() == 1) return std::vector<T>(static_cast<std::size_t>(modes), values.front());
  throw UsageError(flag + ": expected 1 or " + std::to_string(modes) + " comma-separated values, got " +
                   std::to_string(values.size()));
}

// Solver flags shared by fit, stream and grid.
struct SolverFlags {
  double eta = 1.0;
  double eps_abs = 1e-5;
  double eps_rel = 1e-4;
  int max_admm_iters = 2000;
  int max_sweeps = 10;
  double outer_tol = 1e-4;
  bool adaptive_step = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--eta", eta, "ADMM step size");
    cmd->add_option("--eps-abs", eps_abs, "ADMM absolute tolerance");
    cmd->add_option("--eps-rel", eps_rel, "ADMM relative tolerance");
    cmd->add_option("--max-admm-iters", max_admm_iters, "inner ADMM iteration cap");
    cmd->add_option("--max-sweeps", max_sweeps, "outer sweep cap");
    cmd->add_option("--outer-tol", outer_tol, "relative objective decrease that stops the outer loop");
    cmd->add_flag("--adaptive-step", adaptive_step, "residual-balancing ADMM step adaptation");
  }

  TvglConfig inner() const {
    TvglConfig c;
    c.admm_step = eta;
    c.eps_abs = eps_abs;
    c.eps_rel = eps_rel;
    c.max_admm_iters = max_admm_iters;
    c.adaptive_step = adaptive_step;
    return c;
  }
};

struct PenaltyFlags {
  std::string lambda_text = "0.05";
  std::string rho_text = "1.0";
  std::string psi_text = "laplacian";

  void attach(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda_text, "off-diagonal l1 weight, one value or one per mode");
    cmd->add_option("--rho", rho_text, "temporal penalty weight, one value or one per mode");
    cmd->add_option("--psi", psi_text, "temporal penalty kind: laplacian or l1, one value or one per mode");
  }

  KtvglConfig config(int modes, const SolverFlags& solver) const {
    KtvglConfig c;
    c.lambdas = per_mode(parse_double_list(lambda_text, "--lambda"), modes, "--lambda");
    const auto rhos = per_mode(parse_double_list(rho_text, "--rho"), modes, "--rho");
    const auto psis = per_mode(split_on(psi_text, ','), modes, "--psi");
    for (int m = 0; m < modes; ++m) {
      PenaltySpec p;
      try {
        p.kind = penalty_kind_from_name(psis[static_cast<std::size_t>(m)]);
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
      p.rho = rhos[static_cast<std::size_t>(m)];
      c.penalties.push_back(p);
    }
    c.inner = solver.inner();
    c.max_outer_sweeps = solver.max_sweeps;
    c.outer_tol = solver.outer_tol;
    return c;
  }
};

FitInfo make_fit_info(const std::string& variant, const std::string& input, const std::vector<int>& dims,
                      int T, const KtvglConfig& config, const SolverFlags& solver) {
  FitInfo info;
  info.variant = variant;
  info.input = input;
  info.dims = dims;
  info.T = T;
  info.lambdas = config.lambdas;
  for (const PenaltySpec& p : config.penalties) {
    info.rhos.push_back(p.rho);
    info.psis.push_back(penalty_kind_name(p.kind));
  }
  info.eta = solver.eta;
  info.eps_abs = solver.eps_abs;
  info.eps_rel = solver.eps_rel;
  info.max_admm_iters = solver.max_admm_iters;
  info.max_outer_sweeps = solver.max_sweeps;
  info.outer_tol = solver.outer_tol;
  return info;
}

CovariancePath covariance_of_flattened(const TensorSeries& flat) {
  CovariancePath s;
  s.reserve(static_cast<std::size_t>(flat.num_steps()));
  const Eigen::Index d = static_cast<Eigen::Index>(flat.dim_product());
  for (int t = 0; t < flat.num_steps(); ++t) {
    Matrix s_t = Matrix::Zero(d, d);
    for (int n = 0; n < flat.num_samples(t); ++n) {
      const auto v = flat.sample(t, n).vec();
      s_t.noalias() += v * v.transpose();
    }
    s.push_back(s_t / static_cast<double>(flat.num_samples(t)));
  }
  return s;
}

int cmd_synth(const std::string& dims_text, int modes, int T, double edge_prob,
              const std::string& changes_text, int n_per_step, const std::string& range_text,
              std::uint64_t seed, const std::string& out_dir) {
  const auto dims_list = parse_int_list(dims_text, "--dims");
  if (static_cast<int>(dims_list.size()) != modes) {
    throw UsageError("--dims: expected " + std::to_string(modes) + " entries, got " +
                     std::to_string(dims_list.size()));
  }
  std::vector<std::vector<int>> changes(static_cast<std::size_t>(modes));
  if (!changes_text.empty()) {
    const auto per_mode_text = split_on(changes_text, ';');
    if (static_cast<int>(per_mode_text.size()) != modes) {
      throw UsageError("--changes: expected " + std::to_string(modes) + " ;-separated lists");
    }
    for (int m = 0; m < modes; ++m) {
      changes[static_cast<std::size_t>(m)] = parse_int_list(per_mode_text[static_cast<std::size_t>(m)], "--changes");
    }
  }
  const auto range_list = parse_double_list(range_text, "--value-range");
  if (range_list.size() != 2) throw UsageError("--value-range: expected lo,hi");
  if (n_per_step < 1) throw UsageError("--n-per-step must be >= 1");

  const GroundTruth truth =
      gen_network_path(dims_list, T, changes, edge_prob, {range_list[0], range_list[1]}, seed);
  const TensorSeries series = sample_series(truth, n_per_step, seed + 1);

  std::filesystem::create_directories(out_dir);
  const std::string series_path = (std::filesystem::path(out_dir) / "series.txt").string();
  const std::string truth_path = (std::filesystem::path(out_dir) / "truth.txt").string();
  write_series(series_path, series);
  write_truth(truth_path, truth);

  std::cout << "wrote " << series_path << " and " << truth_path << "\n";
  std::cout << "shape (T";
  for (int d : dims_list) std::cout << ", " << d;
  std::cout << ") = (" << T;
  for (int d : dims_list) std::cout << ", " << d;
  std::cout << "), samples per step " << n_per_step << ", seed " << seed << "\n";
  return 0;
}

int cmd_fit(const std::string& input, const PenaltyFlags& penalty, const SolverFlags& solver,
            bool flatten, bool static_fit, bool normalize_report, std::int64_t cap,
            const std::string& out_path) {
  if (flatten && static_fit) throw UsageError("--flatten and --static are mutually exclusive");
  // Flag conflicts are usage errors and are checked before any file is read.
  if (flatten) {
    if (parse_double_list(penalty.lambda_text, "--lambda").size() > 1 ||
        parse_double_list(penalty.rho_text, "--rho").size() > 1 || split_on(penalty.psi_text, ',').size() > 1) {
      throw UsageError("--flatten takes a single lambda, rho and psi");
    }
  }
  const SeriesData data = read_series(input);
  const TensorSeries& x = data.series;
  const auto start = std::chrono::steady_clock::now();

  FitData fit;
  bool converged = true;
  if (flatten) {
    const auto lambdas = parse_double_list(penalty.lambda_text, "--lambda");
    const auto rhos = parse_double_list(penalty.rho_text, "--rho");
    const auto psis = split_on(penalty.psi_text, ',');
    if (x.dim_product() > cap) {
      throw DataError("flattened dimension " + std::to_string(x.dim_product()) +
                      " exceeds the materialization cap " + std::to_string(cap));
    }
    TvglConfig config = solver.inner();
    config.lambda = lambdas.front();
    try {
      config.penalty = PenaltySpec{penalty_kind_from_name(psis.front()), rhos.front()};
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    const TensorSeries flat = flatten_series(x);
    TvglResult result = solve_tvgl(covariance_of_flattened(flat), config);
    converged = result.diagnostics.converged;

    KtvglConfig echo;
    echo.lambdas = {config.lambda};
    echo.penalties = {config.penalty};
    fit.info = make_fit_info("flatten", input, {static_cast<int>(x.dim_product())}, x.num_steps(), echo, solver);
    fit.info.sweeps = 1;
    fit.info.objectives = {result.diagnostics.objective};
    fit.networks.nets.reserve(result.theta.size());
    for (Matrix& m : result.theta) fit.networks.nets.push_back({std::move(m)});
  } else {
    const KtvglConfig config = penalty.config(x.order(), solver);
    KtvglResult result = static_fit ? fit_static_kgl(x, config) : fit_ktvgl(x, config);
    // Reaching the sweep cap with a monotone objective is a normal stop;
    // "not converged" means an inner ADMM solve exhausted its iterations.
    converged = result.diagnostics.inner_all_converged;
    fit.info = make_fit_info(static_fit ? "static" : "ktvgl", input, x.shape(),
                             result.networks.num_steps(), config, solver);
    fit.info.sweeps = result.diagnostics.sweeps;
    fit.info.objectives = result.diagnostics.objectives;
    fit.networks = std::move(result.networks);
    if (result.diagnostics.objective_increased) {
      std::cerr << "warning: objective increased across a sweep; consider tighter inner tolerances\n";
    }
  }

  if (normalize_report) {
    fit.networks = normalize_for_report(fit.networks);
    fit.info.normalized_report = true;
  }
  fit.info.converged = converged;
  fit.info.labels = data.labels;
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!out_path.empty()) write_fit(out_path, fit);
  std::cout << "variant=" << fit.info.variant << " sweeps=" << fit.info.sweeps
            << " objective=" << (fit.info.objectives.empty() ? 0.0 : fit.info.objectives.back())
            << " converged=" << (converged ? "yes" : "no") << " wall_time_s=" << elapsed << "\n";
  if (!converged) {
    std::cerr << "warning: solver did not meet its tolerances\n";
    return 3;
  }
  return 0;
}

int cmd_stream(const std::string& input, int window, const PenaltyFlags& penalty,
               const SolverFlags& solver, const std::string& out_path, std::string timings_path) {
  if (window < 2) throw UsageError("--window must be at least 2");
  const SeriesData data = read_series(input);
  const TensorSeries& x = data.series;
  const KtvglConfig config = penalty.config(x.order(), solver);

  StreamEstimator estimator(x.shape(), window, config);
  MultiNetworkPath newest_path;
  std::vector<double> push_times;
  push_times.reserve(static_cast<std::size_t>(x.num_steps()));
  int unconverged = 0;
  for (int t = 0; t < x.num_steps(); ++t) {
    PushResult r = estimator.push(x.samples()[static_cast<std::size_t>(t)]);
    if (!r.converged) ++unconverged;
    push_times.push_back(r.wall_time_s);
    newest_path.nets.push_back(std::move(r.newest));
  }

  FitData fit;
  fit.info = make_fit_info("stream", input, x.shape(), x.num_steps(), config, solver);
  fit.info.window = window;
  fit.info.sweeps = 0;
  fit.info.converged = unconverged == 0;
  fit.info.labels = data.labels;
  fit.networks = std::move(newest_path);
  if (!out_path.empty()) {
    write_fit(out_path, fit);
    if (timings_path.empty()) timings_path = out_path + ".timings";
  }
  if (!timings_path.empty()) write_timings(timings_path, push_times);

  double mean_time = 0.0;
  for (double s : push_times) mean_time += s;
  mean_time /= static_cast<double>(push_times.size());
  std::cout << "pushes=" << push_times.size() << " mean_push_time_s=" << mean_time
            << " unconverged_pushes=" << unconverged << "\n";
  return unconverged == 0 ? 0 : 3;
}

EvalOptions eval_options_from(const std::string& metrics_text, const std::string& pooling_text,
                              std::int64_t cap) {
  EvalOptions options;
  options.want_auc_roc = options.want_auc_pr = options.want_best_f1 = options.want_tdr = false;
  for (const std::string& metric : split_on(metrics_text, ',')) {
    if (metric == "aucroc") {
      options.want_auc_roc = true;
    } else if (metric == "aucpr") {
      options.want_auc_pr = true;
    } else if (metric == "bestf1") {
      options.want_best_f1 = true;
    } else if (metric == "tdr") {
      options.want_tdr = true;
    } else {
      throw UsageError("unknown metric '" + metric + "' (expected aucroc, aucpr, bestf1, tdr)");
    }
  }
  if (pooling_text == "pooled") {
    options.pooling = Pooling::kPooled;
  } else if (pooling_text == "per-time") {
    options.pooling = Pooling::kPerTime;
  } else {
    throw UsageError("--pooling must be pooled or per-time");
  }
  options.kron_cap = cap;
  return options;
}

MetricReport evaluate_fit(const FitData& fit, const GroundTruth& truth, const EvalOptions& options) {
  if (fit.info.variant == "flatten") {
    MatrixPath path;
    path.reserve(fit.networks.nets.size());
    for (const auto& step : fit.networks.nets) path.push_back(step.front());
    return evaluate_flattened(path, truth, options);
  }
  return evaluate_networks(fit.networks, truth, options);
}

int cmd_eval(const std::string& fit_path, const std::string& truth_path, const std::string& metrics_text,
             const std::string& pooling_text, std::int64_t cap, const std::string& out_path) {
  const FitData fit = read_fit(fit_path);
  const GroundTruth truth = read_truth(truth_path);
  const EvalOptions options = eval_options_from(metrics_text, pooling_text, cap);
  const MetricReport report = evaluate_fit(fit, truth, options);
  const std::string json_text = metric_report_to_json(report);
  std::cout << json_text << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    out << json_text << "\n";
  }
  return 0;
}

int cmd_grid(const std::string& input, const std::string& truth_path, const std::string& lambda_text,
             const std::string& rho_text, const std::string& psi_text, const SolverFlags& solver,
             bool flatten, const std::string& pooling_text, std::int64_t cap, int jobs,
             const std::string& out_path) {
  const auto lambda_grid = parse_double_list(lambda_text, "--lambda-grid");
  const auto rho_grid = parse_double_list(rho_text, "--rho-grid");
  const SeriesData data = read_series(input);
  const GroundTruth truth = read_truth(truth_path);
  EvalOptions options = eval_options_from("aucroc,aucpr,bestf1", pooling_text, cap);

  struct Cell {
    double lambda, rho;
    MetricReport report;
    bool converged;
  };
  const TensorSeries& x = data.series;

  auto run_cell = [&](double lambda, double rho) -> Cell {
    Cell cell{lambda, rho, {}, true};
    PenaltyFlags penalty;
    penalty.lambda_text = format_double(lambda);
    penalty.rho_text = format_double(rho);
    penalty.psi_text = psi_text;
    if (flatten) {
      TvglConfig config = solver.inner();
      config.lambda = lambda;
      config.penalty = PenaltySpec{penalty_kind_from_name(psi_text), rho};
      if (x.dim_product() > cap) {
        throw DataError("flattened dimension exceeds the materialization cap");
      }
      TvglResult result = solve_tvgl(covariance_of_flattened(flatten_series(x)), config);
      cell.converged = result.diagnostics.converged;
      cell.report = evaluate_flattened(result.theta, truth, options);
    } else {
      const KtvglConfig config = penalty.config(x.order(), solver);
      KtvglResult result = fit_ktvgl(x, config);
      cell.converged = result.diagnostics.converged;
      cell.report = evaluate_networks(result.networks, truth, options);
    }
    return cell;
  };

  std::vector<std::pair<double, double>> cells;
  for (double lambda : lambda_grid) {
    for (double rho : rho_grid) cells.emplace_back(lambda, rho);
  }
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));

  std::vector<Cell> results;
  results.reserve(cells.size());
  if (jobs == 1) {
    for (const auto& [lambda, rho] : cells) results.push_back(run_cell(lambda, rho));
  } else {
    std::vector<std::future<Cell>> futures;
    futures.reserve(cells.size());
    std::size_t next = 0;
    // Bounded fan-out keeps at most `jobs` concurrent fits.
    while (next < cells.size() || !futures.empty()) {
      while (next < cells.size() && futures.size() < static_cast<std::size_t>(jobs)) {
        const auto [lambda, rho] = cells[next++];
        futures.push_back(std::async(std::launch::async, run_cell, lambda, rho));
      }
      results.push_back(futures.front().get());
      futures.erase(futures.begin());
    }
  }

  std::ostringstream table;
  nlohmann::json header;
  header["kind"] = "grid";
  header["schema_version"] = 1;
  header["lambda_grid"] = lambda_grid;
  header["rho_grid"] = rho_grid;
  header["psi"] = psi_text;
  header["pooling"] = pooling_text;
  header["variant"] = flatten ? "flatten" : "ktvgl";
  table << header.dump() << "\n";
  table << "lambda rho auc_roc auc_pr best_f1 converged\n";
  const Cell* best = nullptr;
  for (const Cell& cell : results) {
    const auto& s = cell.report.summary;
    table << format_double(cell.lambda) << ' ' << format_double(cell.rho) << ' '
          << (s.auc_roc ? format_double(*s.auc_roc) : "nan") << ' '
          << (s.auc_pr ? format_double(*s.auc_pr) : "nan") << ' '
          << (s.best_f1 ? format_double(*s.best_f1) : "nan") << ' ' << (cell.converged ? 1 : 0) << "\n";
    if (s.auc_roc && (!best || !best->report.summary.auc_roc || *s.auc_roc > *best->report.summary.auc_roc)) {
      best = &cell;
    }
  }
  std::cout << table.str();
  if (best) {
    std::cout << "best: lambda=" << format_double(best->lambda) << " rho=" << format_double(best->rho)
              << " auc_roc=" << format_double(*best->report.summary.auc_roc) << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    out << table.str();
  }
  return 0;
}

int cmd_prep(const std::string& input, const std::string& layout_text, int smooth,
             const std::string& normalize_text, const std::string& out_path) {
  PrepOptions options;
  if (layout_text == "long") {
    options.layout = PrepOptions::Layout::kLong;
  } else if (layout_text == "wide") {
    options.layout = PrepOptions::Layout::kWide;
  } else {
    throw UsageError("--layout must be long or wide");
  }
  if (smooth < 1) throw UsageError("--smooth must be >= 1");
  options.smooth_window = smooth;
  if (normalize_text == "z") {
    options.normalize = PrepOptions::Normalize::kZScore;
  } else if (normalize_text == "minmax") {
    options.normalize = PrepOptions::Normalize::kMinMax;
  } else {
    throw UsageError("--normalize must be z or minmax");
  }

  const SeriesData data = prep_csv_file(input, options);
  write_series(out_path, data.series, data.labels);
  std::cout << "wrote " << out_path << " with shape (" << data.series.num_steps();
  for (int d : data.series.shape()) std::cout << ", " << d;
  std::cout << ")\n";
  return 0;
}

int cmd_export(const std::string& fit_path, int t, int mode, double threshold,
               const std::string& format_text, const std::string& out_path) {
  const FitData fit = read_fit(fit_path);
  if (t < 0 || t >= fit.networks.num_steps()) throw UsageError("--t out of range");
  if (mode < 0 || mode >= fit.networks.num_modes()) throw UsageError("--mode out of range");
  ExportOptions options;
  options.threshold = threshold;
  if (format_text == "dot") {
    options.format = ExportOptions::Format::kDot;
  } else if (format_text == "json") {
    options.format = ExportOptions::Format::kJson;
  } else {
    throw UsageError("--format must be dot or json");
  }
  options.name = "mode" + std::to_string(mode) + "_t" + std::to_string(t);
  std::vector<std::string> labels;
  if (static_cast<int>(fit.info.labels.mode_labels.size()) > mode) {
    labels = fit.info.labels.mode_labels[static_cast<std::size_t>(mode)];
  }
  const Matrix& theta = fit.networks.nets[static_cast<std::size_t>(t)][static_cast<std::size_t>(mode)];
  const std::string text = export_network(theta, labels, options);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    out << text;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Kronecker time-varying graphical lasso: mode-specific dynamic network estimation "
               "for tensor time series"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic series with piecewise-constant truth");
  int modes = 2, T = 300, n_per_step = 1;
  std::string dims_text, changes_text, range_text = "-3,3", synth_out = "synth_out";
  double edge_prob = 0.25;
  std::uint64_t seed = 0;
  synth->add_option("--modes", modes, "number of non-temporal modes")->required();
  synth->add_option("--dims", dims_text, "comma list of mode dimensions")->required();
  synth->add_option("--T", T, "sequence length");
  synth->add_option("--edge-prob", edge_prob, "edge probability of the random truth");
  synth->add_option("--changes", changes_text,
                    "per-mode change points, ;-separated lists of 0-based first-new-step indices");
  synth->add_option("--n-per-step", n_per_step, "samples per time step");
  synth->add_option("--value-range", range_text, "edge weight range lo,hi");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory");

  // fit
  auto* fit = app.add_subcommand("fit", "batch fit on a series file");
  std::string fit_input, fit_out;
  PenaltyFlags fit_penalty;
  SolverFlags fit_solver;
  bool flatten = false, static_fit = false, normalize_report = false;
  std::int64_t cap = kDefaultKronCap;
  fit->add_option("--input", fit_input, "series file")->required();
  fit_penalty.attach(fit);
  fit_solver.attach(fit);
  fit->add_flag("--flatten", flatten, "fit one flattened network over the vectorized tensor");
  fit->add_flag("--static", static_fit, "fit a single static network per mode");
  fit->add_flag("--normalize-report", normalize_report, "rescale reported factors to trace d_m");
  fit->add_option("--cap", cap, "flattened materialization cap");
  fit->add_option("--out", fit_out, "fit output file");

  // stream
  auto* stream = app.add_subcommand("stream", "replay a series through the sliding-window estimator");
  std::string stream_input, stream_out, timings_out;
  int window = 0;
  PenaltyFlags stream_penalty;
  SolverFlags stream_solver;
  stream->add_option("--input", stream_input, "series file")->required();
  stream->add_option("--window", window, "sliding window length")->required();
  stream_penalty.attach(stream);
  stream_solver.attach(stream);
  stream->add_option("--out", stream_out, "fit output file (newest estimate per step)");
  stream->add_option("--timings-out", timings_out, "per-push wall time file (default: <out>.timings)");

  // eval
  auto* eval = app.add_subcommand("eval", "score a fit against ground truth");
  std::string eval_fit, eval_truth, metrics_text = "aucroc,aucpr,bestf1", pooling_text = "pooled", eval_out;
  std::int64_t eval_cap = kDefaultKronCap;
  eval->add_option("--fit", eval_fit, "fit file")->required();
  eval->add_option("--truth", eval_truth, "truth file")->required();
  eval->add_option("--metrics", metrics_text, "comma list from aucroc,aucpr,bestf1,tdr");
  eval->add_option("--pooling", pooling_text, "pooled or per-time");
  eval->add_option("--cap", eval_cap, "flattened materialization cap");
  eval->add_option("--out", eval_out, "also write the JSON report here");

  // grid
  auto* grid = app.add_subcommand("grid", "fit a lambda x rho grid and rank by AUC-ROC");
  std::string grid_input, grid_truth, lambda_grid_text, rho_grid_text, grid_psi = "laplacian";
  std::string grid_pooling = "pooled", grid_out;
  SolverFlags grid_solver;
  bool grid_flatten = false;
  std::int64_t grid_cap = kDefaultKronCap;
  int jobs = 0;
  grid->add_option("--input", grid_input, "series file")->required();
  grid->add_option("--truth", grid_truth, "truth file")->required();
  grid->add_option("--lambda-grid", lambda_grid_text, "comma list of lambda values")->required();
  grid->add_option("--rho-grid", rho_grid_text, "comma list of rho values")->required();
  grid->add_option("--psi", grid_psi, "temporal penalty kind for all cells");
  grid_solver.attach(grid);
  grid->add_flag("--flatten", grid_flatten, "grid the flattened baseline instead");
  grid->add_option("--pooling", grid_pooling, "pooled or per-time");
  grid->add_option("--cap", grid_cap, "flattened materialization cap");
  grid->add_option("--jobs", jobs, "parallel grid cells (default: hardware threads)");
  grid->add_option("--out", grid_out, "table output file");

  // prep
  auto* prep = app.add_subcommand("prep", "turn a CSV into a series file (smooth, then normalize)");
  std::string prep_input, layout_text = "long", normalize_text = "z", prep_out;
  int smooth = 4;
  prep->add_option("--input", prep_input, "CSV file")->required();
  prep->add_option("--layout", layout_text, "long or wide");
  prep->add_option("--smooth", smooth, "centered moving-average window (1 = off)");
  prep->add_option("--normalize", normalize_text, "z or minmax");
  prep->add_option("--out", prep_out, "series output file")->required();

  // export
  auto* exp = app.add_subcommand("export", "emit one network snapshot as a graph");
  std::string export_fit, format_text = "dot", export_out;
  int export_t = 0, export_mode = 0;
  double threshold = 0.01;
  exp->add_option("--fit", export_fit, "fit file")->required();
  exp->add_option("--t", export_t, "time index (0-based)");
  exp->add_option("--mode", export_mode, "mode index (0-based)");
  exp->add_option("--threshold", threshold, "partial-correlation magnitude cutoff");
  exp->add_option("--format", format_text, "dot or json");
  exp->add_option("--out", export_out, "output file (stdout when omitted)");

  std::vector<const char*> argv;
  argv.push_back("ktvgl");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(dims_text, modes, T, edge_prob, changes_text, n_per_step, range_text, seed, synth_out);
    }
    if (fit->parsed()) {
      return cmd_fit(fit_input, fit_penalty, fit_solver, flatten, static_fit, normalize_report, cap, fit_out);
    }
    if (stream->parsed()) {
      return cmd_stream(stream_input, window, stream_penalty, stream_solver, stream_out, timings_out);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_fit, eval_truth, metrics_text, pooling_text, eval_cap, eval_out);
    }
    if (grid->parsed()) {
      return cmd_grid(grid_input, grid_truth, lambda_grid_text, rho_grid_text, grid_psi, grid_solver,
                      grid_flatten, grid_pooling, grid_cap, jobs, grid_out);
    }
    if (prep->parsed()) {
      return cmd_prep(prep_input, layout_text, smooth, normalize_text, prep_out);
    }
    if (exp->parsed()) {
      return cmd_export(export_fit, export_t, export_mode, threshold, format_text, export_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace ktvgl
