#pragma once

// simulate -> train -> detect -> evaluate, with file I/O, run manifests and
// the exit-code contract: 0 success, 2 usage/config/data, 3 I/O, 4 numeric.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mibwatch/change_detect.hpp"
#include "mibwatch/error.hpp"
#include "mibwatch/metrics.hpp"
#include "mibwatch/mib_model.hpp"
#include "mibwatch/nnarx.hpp"
#include "mibwatch/traffic_sim.hpp"

#ifndef MIBWATCH_VERSION
#define MIBWATCH_VERSION "0.0.0"
#endif

namespace mibwatch {

inline constexpr std::string_view kVersion = MIBWATCH_VERSION;

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitIo = 3, kExitNumeric = 4 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Divergence: return kExitNumeric;
    default: return kExitUsage;
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Closed-loop detection
// ---------------------------------------------------------------------------

struct DetectionRun {
  std::vector<TimedValue> observed;
  std::vector<TimedValue> predicted;
  std::vector<TimedValue> residuals;
  StreamResult result;
};

// Predicts each sample one step ahead and charts the residual. With feedback
// on, the prediction replaces the observation in later regressors for every
// alarmed sample and for every sample of a window that follows one where
// most samples alarmed, so a sustained attack never leaks into the
// predictor's history; the predictor resumes on observations once a window
// is mostly back in control.
// With feedback off the residuals equal predict_series + residuals and the
// verdicts equal stream_detect.
inline DetectionRun run_detection(const Network& net, const Dataset& series, const WindowConfig& cfg,
                                  bool feedback = true) {
  cfg.validate();
  net.lag.validate();
  if (series.mode() != CounterMode::Delta) throw Error(ErrorKind::Config, "detection runs on delta data");
  if (net.input_width() != net.lag.input_width()) throw Error(ErrorKind::Schema, "model lags do not match its dimensions");

  const auto y = series.column(net.target);
  const auto u = net.lag.nb > 0 ? series.column(*net.lag.exogenous) : std::vector<double>{};
  const auto start = net.lag.first_target();
  if (y.size() < start + 2 * cfg.window_size)
    throw Error(ErrorKind::InsufficientData, "series too short for the model lags plus two detection windows");
  const std::size_t count = y.size() - start;
  const std::size_t charted = count - count % cfg.window_size;

  auto history = y;
  std::vector<double> input(net.input_width());
  ControlChart chart(cfg);
  DetectionRun run;
  run.observed.reserve(count);
  run.predicted.reserve(count);
  run.residuals.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t t = start + r;
    for (std::size_t i = 0; i < net.lag.na; ++i) input[i] = net.scaler.scale(net.target, history[t - 1 - i]);
    for (std::size_t i = 0; i < net.lag.nb; ++i)
      input[net.lag.na + i] = net.scaler.scale(*net.lag.exogenous, u[t - net.lag.nk - i]);
    const double pred = net.scaler.unscale(net.target, forward(net, input));
    const auto ts = series[t].timestamp;
    run.observed.push_back({ts, y[t]});
    run.predicted.push_back({ts, pred});
    run.residuals.push_back({ts, y[t] - pred});
    if (r < charted) {
      const bool out_of_control = !chart.verdicts().empty() && 2 * chart.verdicts().back().alarms > cfg.window_size;
      const auto alarm = chart.push(ts, y[t] - pred);
      if (feedback && (alarm || out_of_control)) history[t] = pred;
    }
  }
  run.result = {chart.alarms(), chart.verdicts()};
  return run;
}

// ---------------------------------------------------------------------------
// CSV emitters and readers for detection artifacts
// ---------------------------------------------------------------------------

inline constexpr std::string_view kAlarmHeader = "window_index,sample_index,timestamp,value,violated,cl,ucl,lcl";
inline constexpr std::string_view kFlagHeader = "window_index,start_timestamp,end_timestamp,flag";

inline std::string alarms_csv(const std::vector<AlarmEvent>& alarms) {
  std::ostringstream out;
  out << kAlarmHeader << '\n';
  for (const auto& a : alarms) {
    out << a.window_index << ',' << a.sample_index << ',' << a.timestamp << ',' << text::format_double(a.value) << ','
        << name_of(a.violated) << ',' << text::format_double(a.limits.cl) << ','
        << text::format_double(a.limits.ucl) << ',' << text::format_double(a.limits.lcl) << '\n';
  }
  return out.str();
}

inline std::string_view name_of(WindowFlag f) { return f == WindowFlag::Flagged ? "flagged" : "clear"; }

inline std::string flags_csv(const std::vector<WindowVerdict>& windows) {
  std::ostringstream out;
  out << kFlagHeader << '\n';
  for (const auto& w : windows)
    out << w.window_index << ',' << w.start_timestamp << ',' << w.end_timestamp << ',' << name_of(w.flag) << '\n';
  return out.str();
}

inline std::string residuals_csv(const DetectionRun& run) {
  std::ostringstream out;
  out << "timestamp,observed,predicted,residual\n";
  for (std::size_t i = 0; i < run.residuals.size(); ++i)
    out << run.residuals[i].timestamp << ',' << text::format_double(run.observed[i].value) << ','
        << text::format_double(run.predicted[i].value) << ',' << text::format_double(run.residuals[i].value) << '\n';
  return out.str();
}

struct FlagRow {
  std::size_t window_index = 0;
  std::int64_t start_timestamp = 0;
  std::int64_t end_timestamp = 0;
  WindowFlag flag = WindowFlag::Clear;
};

inline std::vector<FlagRow> parse_flags(std::string_view content) {
  std::vector<FlagRow> rows;
  std::size_t line_no = 0;
  bool header = false;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != kFlagHeader) throw ParseError(line_no, "unexpected flag file header");
      header = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 4) throw ParseError(line_no, "expected 4 fields");
    const auto idx = text::parse_number<std::size_t>(f[0]);
    const auto start = text::parse_number<std::int64_t>(f[1]);
    const auto end = text::parse_number<std::int64_t>(f[2]);
    if (!idx || !start || !end || *end < *start) throw ParseError(line_no, "malformed window row");
    const auto flag = text::trim(f[3]);
    if (flag != "flagged" && flag != "clear") throw ParseError(line_no, "flag must be 'flagged' or 'clear'");
    rows.push_back({*idx, *start, *end, flag == "flagged" ? WindowFlag::Flagged : WindowFlag::Clear});
  }
  if (!header) throw ParseError(line_no, "flag file is empty");
  return rows;
}

// A window is an attack window if any record inside it is not Normal.
inline std::vector<WindowLabel> window_labels(const Dataset& data, const std::vector<FlagRow>& windows) {
  const auto first = data[0].timestamp;
  const auto last = data.records().back().timestamp;
  std::vector<WindowLabel> labels;
  labels.reserve(windows.size());
  for (const auto& w : windows) {
    if (w.start_timestamp < first || w.end_timestamp > last || (w.start_timestamp - first) % kPollIntervalSeconds != 0 ||
        (w.end_timestamp - first) % kPollIntervalSeconds != 0)
      throw Error(ErrorKind::Alignment, "window " + std::to_string(w.window_index) + " does not line up with the dataset");
    const auto lo = static_cast<std::size_t>((w.start_timestamp - first) / kPollIntervalSeconds);
    const auto hi = static_cast<std::size_t>((w.end_timestamp - first) / kPollIntervalSeconds);
    bool attack = false;
    for (std::size_t i = lo; i <= hi; ++i) attack = attack || data[i].label != TrafficClass::Normal;
    labels.push_back(attack ? WindowLabel::Attack : WindowLabel::Normal);
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct RunContext {
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::optional<std::string> manifest_path;
  std::vector<std::string> argv;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

namespace detail {

class ManifestRecorder {
 public:
  ManifestRecorder(const RunContext& ctx, std::string command)
      : ctx_(ctx), started_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["args"] = ctx.argv;
    doc_["tool_version"] = std::string(kVersion);
    doc_["config"] = nlohmann::json::object();
    doc_["inputs"] = nlohmann::json::array();
    doc_["outputs"] = nlohmann::json::array();
    doc_["seed"] = nullptr;
  }

  nlohmann::json& config() { return doc_["config"]; }
  void input(const std::string& path) { doc_["inputs"].push_back(path); }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  void seed(std::uint64_t s) { doc_["seed"] = s; }

  void finish() {
    if (!ctx_.manifest_path) return;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started_;
    doc_["wall_clock_seconds"] = elapsed.count();
    write_file(*ctx_.manifest_path, doc_.dump(2) + "\n");
  }

 private:
  const RunContext& ctx_;
  std::chrono::steady_clock::time_point started_;
  nlohmann::json doc_;
};

template <typename Fn>
int guarded(const RunContext& ctx, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (ctx.err) *ctx.err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    if (ctx.err) *ctx.err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline std::ostream& out(const RunContext& ctx) {
  static std::ostringstream sink;
  sink.str({});
  return (ctx.quiet || !ctx.out) ? sink : *ctx.out;
}

inline Variable parse_variable(const std::string& name) {
  const auto v = variable_from_name(name);
  if (!v) throw Error(ErrorKind::Config, "unknown variable '" + name + "'");
  return *v;
}

inline RegressionSet select_rows(const RegressionSet& set, const std::vector<std::size_t>& rows) {
  RegressionSet out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), set.x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    out.x.row(static_cast<Eigen::Index>(i)) = set.x.row(src);
    out.y(static_cast<Eigen::Index>(i)) = set.y(src);
    out.timestamps.push_back(set.timestamps[rows[i]]);
    out.target_index.push_back(set.target_index[rows[i]]);
  }
  return out;
}

inline std::string format_metric(double v) {
  std::ostringstream s;
  s << std::setprecision(8) << v;
  return s.str();
}

inline std::string percent(const std::optional<double>& rate) {
  if (!rate) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << *rate * 100.0 << '%';
  return s.str();
}

template <typename Fn>
std::optional<double> defined_rate(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UndefinedRate) throw;
    return std::nullopt;
  }
}

}  // namespace detail

struct SimulateOptions {
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::string out_path;
};

// Writes cumulative counters, as an SNMP poller would record them.
inline int cmd_simulate(const SimulateOptions& opt, const RunContext& ctx) {
  return detail::guarded(ctx, [&] {
    detail::ManifestRecorder manifest(ctx, "simulate");
    if (opt.preset.has_value() == opt.config_path.has_value())
      throw Error(ErrorKind::Config, "give exactly one of --preset or --config");
    if (opt.out_path.empty()) throw Error(ErrorKind::Config, "an output path is required");

    ScenarioConfig cfg;
    if (opt.preset) {
      cfg = preset_scenario(*opt.preset);
      manifest.config()["preset"] = *opt.preset;
    } else {
      cfg = parse_scenario(read_file(*opt.config_path));
      manifest.input(*opt.config_path);
    }
    if (ctx.seed) cfg.baseline.seed = *ctx.seed;
    manifest.seed(cfg.baseline.seed);
    manifest.config()["scenario"] = format_scenario(cfg);

    const auto deltas = gen_scenario(cfg);
    const auto cumulative = accumulate_counters(deltas, default_initial_counters());
    write_file(opt.out_path, to_csv(cumulative));
    manifest.output(opt.out_path);

    auto& o = detail::out(ctx);
    o << "wrote " << cumulative.size() << " records to " << opt.out_path << '\n';
    std::array<std::size_t, kAllTrafficClasses.size()> counts{};
    for (const auto& r : deltas.records()) ++counts[static_cast<std::size_t>(r.label)];
    for (auto c : kAllTrafficClasses)
      if (counts[static_cast<std::size_t>(c)] > 0)
        o << "  " << std::left << std::setw(12) << name_of(c) << counts[static_cast<std::size_t>(c)] << '\n';
    manifest.finish();
    return kExitOk;
  });
}

struct TrainOptions {
  std::string data_path;
  std::string model_out;
  std::string target = "ifInOctets";
  std::size_t na = 8;
  std::size_t nb = 0;
  std::size_t nk = 1;
  std::optional<std::string> exogenous;
  long long iterations = 1000;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double init_scale = 0.5;
  double split = 0.7;
  std::size_t hidden = kDefaultHidden;
};

struct TrainSummary {
  ErrorReport train;
  std::optional<ErrorReport> test;
  double final_loss = 0.0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

// Trains on rows whose target and every lagged sample are Normal-labeled.
inline std::pair<Network, TrainSummary> train_on_normal(const Dataset& deltas, Variable target, const LagConfig& lag,
                                                        const TrainConfig& tcfg, double split,
                                                        std::size_t hidden = kDefaultHidden) {
  lag.validate();
  tcfg.validate();
  if (!(split > 0.0 && split <= 1.0)) throw Error(ErrorKind::Config, "split must lie in (0, 1]");

  std::vector<MibRecord> normal;
  for (const auto& r : deltas.records())
    if (r.label == TrafficClass::Normal) normal.push_back(r);
  if (normal.empty()) throw Error(ErrorKind::Config, "dataset has no Normal-labeled records to train on");
  // Poll grid is irrelevant for fitting ranges; re-time the subset so it forms a valid dataset.
  for (std::size_t i = 0; i < normal.size(); ++i)
    normal[i].timestamp = static_cast<std::int64_t>(i) * kPollIntervalSeconds;
  const auto scaler = fit_scaler(Dataset(std::move(normal), CounterMode::Delta), model_variables(target, lag));

  const auto all = build_regressors(deltas, target, lag, scaler);
  const std::size_t span = lag.first_target();
  std::vector<std::size_t> keep;
  for (std::size_t row = 0; row < all.size(); ++row) {
    const std::size_t t = all.target_index[row];
    bool clean = true;
    for (std::size_t i = t - span; i <= t && clean; ++i) clean = deltas[i].label == TrafficClass::Normal;
    if (clean) keep.push_back(row);
  }
  if (keep.size() < 2) throw Error(ErrorKind::InsufficientData, "fewer than two fully Normal regressor rows");

  const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(keep.size()) * split));
  const std::vector<std::size_t> train_idx(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> test_idx(keep.begin() + static_cast<std::ptrdiff_t>(n_train), keep.end());
  const auto train_set = detail::select_rows(all, train_idx);

  auto net = make_network(lag, target, scaler, tcfg, hidden);
  auto trained = train(std::move(net), train_set, tcfg);

  auto evaluate = [&](const RegressionSet& set, std::vector<double>* resid) {
    const Eigen::VectorXd pred = forward_batch(trained.net, set.x);
    std::vector<double> obs, est;
    for (std::size_t i = 0; i < set.size(); ++i) {
      obs.push_back(trained.net.scaler.unscale(target, set.y(static_cast<Eigen::Index>(i))));
      est.push_back(trained.net.scaler.unscale(target, pred(static_cast<Eigen::Index>(i))));
      if (resid) resid->push_back(obs.back() - est.back());
    }
    return error_report(obs, est);
  };

  TrainSummary summary;
  std::vector<double> train_resid, test_resid;
  summary.train = evaluate(train_set, &train_resid);
  if (!test_idx.empty()) summary.test = evaluate(detail::select_rows(all, test_idx), &test_resid);
  summary.final_loss = trained.final_loss;
  summary.train_rows = train_idx.size();
  summary.test_rows = test_idx.size();

  // Held-out residuals when there are enough of them: in-sample residuals
  // understate the spread the detector will see.
  const auto& resid = test_resid.size() >= 2 ? test_resid : train_resid;
  if (resid.size() >= 2) {
    double mean = 0.0;
    for (double r : resid) mean += r;
    mean /= static_cast<double>(resid.size());
    double ss = 0.0;
    for (double r : resid) ss += (r - mean) * (r - mean);
    trained.net.residual_std = std::sqrt(ss / static_cast<double>(resid.size() - 1));
  }
  return {std::move(trained.net), summary};
}

inline void print_error_table(std::ostream& o, const TrainSummary& s) {
  auto cell = [](const std::optional<ErrorReport>& r, double ErrorReport::*field) {
    return r ? detail::format_metric((*r).*field) : std::string("n/a");
  };
  const std::optional<ErrorReport> train = s.train;
  o << std::left << std::setw(10) << "Criteria" << std::setw(18) << "Training" << "Testing" << '\n';
  o << std::setw(10) << "MSE" << std::setw(18) << cell(train, &ErrorReport::mse) << cell(s.test, &ErrorReport::mse) << '\n';
  o << std::setw(10) << "MD" << std::setw(18) << cell(train, &ErrorReport::md) << cell(s.test, &ErrorReport::md) << '\n';
  o << std::setw(10) << "ED" << std::setw(18) << cell(train, &ErrorReport::ed) << cell(s.test, &ErrorReport::ed) << '\n';
  o << std::setw(10) << "MMRE" << std::setw(18) << cell(train, &ErrorReport::mmre) << cell(s.test, &ErrorReport::mmre) << '\n';
}

inline int cmd_train(const TrainOptions& opt, const RunContext& ctx) {
  return detail::guarded(ctx, [&] {
    detail::ManifestRecorder manifest(ctx, "train");
    if (opt.iterations < 1) throw Error(ErrorKind::Config, "--iterations must be at least 1");
    if (opt.data_path.empty() || opt.model_out.empty()) throw Error(ErrorKind::Config, "data and model paths are required");

    LagConfig lag{opt.na, opt.nb, opt.nk, std::nullopt};
    if (opt.exogenous) lag.exogenous = detail::parse_variable(*opt.exogenous);
    const auto target = detail::parse_variable(opt.target);
    TrainConfig tcfg;
    tcfg.iterations = static_cast<std::size_t>(opt.iterations);
    tcfg.learning_rate = opt.learning_rate;
    tcfg.momentum = opt.momentum;
    tcfg.init_scale = opt.init_scale;
    tcfg.seed = ctx.seed.value_or(1);

    auto& cfg = manifest.config();
    cfg["target"] = opt.target;
    cfg["na"] = opt.na;
    cfg["nb"] = opt.nb;
    cfg["nk"] = opt.nk;
    cfg["exogenous"] = opt.exogenous.value_or("-");
    cfg["iterations"] = opt.iterations;
    cfg["learning_rate"] = opt.learning_rate;
    cfg["momentum"] = opt.momentum;
    cfg["init_scale"] = opt.init_scale;
    cfg["split"] = opt.split;
    cfg["hidden"] = opt.hidden;
    manifest.seed(tcfg.seed);
    manifest.input(opt.data_path);

    const auto deltas = counter_deltas(parse_dataset(read_file(opt.data_path)));
    auto [net, summary] = train_on_normal(deltas, target, lag, tcfg, opt.split, opt.hidden);
    write_file(opt.model_out, save_model(net));
    manifest.output(opt.model_out);

    auto& o = detail::out(ctx);
    o << "trained " << net.input_width() << '-' << net.hidden_width() << "-1 network on " << summary.train_rows
      << " rows (" << summary.test_rows << " held out), final scaled MSE " << detail::format_metric(summary.final_loss)
      << '\n';
    print_error_table(o, summary);
    manifest.finish();
    return kExitOk;
  });
}

struct DetectOptions {
  std::string data_path;
  std::string model_path;
  std::string alarms_out;
  std::string flags_out;
  std::optional<std::string> residuals_out;
  double k = 3.0;
  std::size_t window_size = 9;
  std::string baseline_update = "clean-only";
  // "model" takes the residual std stored with the model, when it has one.
  std::string sigma_floor = "model";
  bool feedback = true;
};

inline WindowConfig resolve_window_config(const DetectOptions& opt, const Network& net) {
  WindowConfig cfg;
  cfg.k = opt.k;
  cfg.window_size = opt.window_size;
  const auto mode = baseline_update_from_name(opt.baseline_update);
  if (!mode) throw Error(ErrorKind::Config, "--baseline-update must be 'always' or 'clean-only'");
  cfg.baseline_update = *mode;
  if (opt.sigma_floor == "model") {
    if (net.residual_std) cfg.sigma_floor = *net.residual_std;
  } else {
    const auto v = text::parse_number<double>(opt.sigma_floor);
    if (!v) throw Error(ErrorKind::Config, "--sigma-floor must be 'model' or a number");
    cfg.sigma_floor = *v;
  }
  cfg.validate();
  return cfg;
}

inline int cmd_detect(const DetectOptions& opt, const RunContext& ctx) {
  return detail::guarded(ctx, [&] {
    detail::ManifestRecorder manifest(ctx, "detect");
    if (opt.data_path.empty() || opt.model_path.empty() || opt.alarms_out.empty() || opt.flags_out.empty())
      throw Error(ErrorKind::Config, "data, model, alarms and flags paths are required");
    manifest.input(opt.data_path);
    manifest.input(opt.model_path);

    const auto deltas = counter_deltas(parse_dataset(read_file(opt.data_path)));
    const auto net = load_model(read_file(opt.model_path));
    const auto cfg = resolve_window_config(opt, net);
    auto& mc = manifest.config();
    mc["k"] = cfg.k;
    mc["window_size"] = cfg.window_size;
    mc["baseline_update"] = std::string(name_of(cfg.baseline_update));
    mc["sigma_floor"] = cfg.sigma_floor;
    mc["feedback"] = opt.feedback;

    const auto run = run_detection(net, deltas, cfg, opt.feedback);
    write_file(opt.alarms_out, alarms_csv(run.result.alarms));
    manifest.output(opt.alarms_out);
    write_file(opt.flags_out, flags_csv(run.result.windows));
    manifest.output(opt.flags_out);
    if (opt.residuals_out) {
      write_file(*opt.residuals_out, residuals_csv(run));
      manifest.output(*opt.residuals_out);
    }

    std::size_t flagged = 0;
    for (const auto& w : run.result.windows) flagged += w.flag == WindowFlag::Flagged;
    detail::out(ctx) << "tested " << run.result.windows.size() << " windows of " << cfg.window_size << ", flagged "
                     << flagged << ", " << run.result.alarms.size() << " alarms (k=" << detail::format_metric(cfg.k)
                     << ", sigma floor " << detail::format_metric(cfg.sigma_floor) << ")\n";
    manifest.finish();
    return kExitOk;
  });
}

struct EvaluateOptions {
  std::string flags_path;
  std::string data_path;
  std::optional<std::string> csv_out;
};

struct Evaluation {
  ConfusionMatrix cm;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> accuracy;
};

inline Evaluation evaluate_flags(const std::vector<FlagRow>& flags, const Dataset& data) {
  const auto labels = window_labels(data, flags);
  std::vector<WindowFlag> f;
  for (const auto& r : flags) f.push_back(r.flag);
  Evaluation ev;
  ev.cm = confusion_from_flags(labels, f);
  ev.sensitivity = detail::defined_rate([&] { return sensitivity(ev.cm); });
  ev.specificity = detail::defined_rate([&] { return specificity(ev.cm); });
  ev.accuracy = detail::defined_rate([&] { return accuracy(ev.cm); });
  return ev;
}

inline void print_evaluation(std::ostream& o, const Evaluation& ev) {
  o << std::left << std::setw(18) << "" << std::right << std::setw(18) << "Predicted attack" << std::setw(22)
    << "Predicted no attack" << '\n';
  o << std::left << std::setw(18) << "Actual attack" << std::right << std::setw(18) << ev.cm.tp << std::setw(22)
    << ev.cm.fn << '\n';
  o << std::left << std::setw(18) << "Actual no attack" << std::right << std::setw(18) << ev.cm.fp << std::setw(22)
    << ev.cm.tn << '\n';
  o << '\n';
  o << std::left << std::setw(13) << "Sensitivity" << std::right << std::setw(7) << detail::percent(ev.sensitivity) << '\n';
  o << std::left << std::setw(13) << "Specificity" << std::right << std::setw(7) << detail::percent(ev.specificity) << '\n';
  o << std::left << std::setw(13) << "Accuracy" << std::right << std::setw(7) << detail::percent(ev.accuracy) << '\n';
}

inline std::string evaluation_csv(const Evaluation& ev) {
  auto rate = [](const std::optional<double>& r) { return r ? text::format_double(*r) : std::string("n/a"); };
  std::ostringstream out;
  out << "metric,value\n";
  out << "tp," << ev.cm.tp << "\nfp," << ev.cm.fp << "\ntn," << ev.cm.tn << "\nfn," << ev.cm.fn << '\n';
  out << "sensitivity," << rate(ev.sensitivity) << '\n';
  out << "specificity," << rate(ev.specificity) << '\n';
  out << "accuracy," << rate(ev.accuracy) << '\n';
  return out.str();
}

inline int cmd_evaluate(const EvaluateOptions& opt, const RunContext& ctx) {
  return detail::guarded(ctx, [&] {
    detail::ManifestRecorder manifest(ctx, "evaluate");
    if (opt.flags_path.empty() || opt.data_path.empty()) throw Error(ErrorKind::Config, "flags and data paths are required");
    manifest.input(opt.flags_path);
    manifest.input(opt.data_path);
    const auto flags = parse_flags(read_file(opt.flags_path));
    const auto data = parse_dataset(read_file(opt.data_path));
    const auto ev = evaluate_flags(flags, data);
    print_evaluation(detail::out(ctx), ev);
    if (opt.csv_out) {
      write_file(*opt.csv_out, evaluation_csv(ev));
      manifest.output(*opt.csv_out);
    }
    manifest.finish();
    return kExitOk;
  });
}

}  // namespace mibwatch
