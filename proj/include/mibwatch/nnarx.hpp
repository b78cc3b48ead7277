#pragma once

// NNARX one-step-ahead traffic predictor: a single-hidden-layer perceptron
// (sigmoid hidden units, linear output) over lagged values of the target
// series and, optionally, one exogenous series.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mibwatch/error.hpp"
#include "mibwatch/mib_model.hpp"
#include "mibwatch/text.hpp"

namespace mibwatch {

// Regressor for target index t:
//   [y(t-1) ... y(t-na), u(t-nk) ... u(t-nk-nb+1)]
struct LagConfig {
  std::size_t na = 8;
  std::size_t nb = 0;
  std::size_t nk = 1;
  std::optional<Variable> exogenous;

  std::size_t input_width() const { return na + nb; }

  // First target index with a complete regressor.
  std::size_t first_target() const { return nb == 0 ? na : std::max(na, nk + nb - 1); }

  void validate() const {
    if (na < 1) throw Error(ErrorKind::Config, "na must be at least 1");
    if (nk < 1) throw Error(ErrorKind::Config, "nk must be at least 1");
    if (nb > 0 && !exogenous) throw Error(ErrorKind::Config, "nb > 0 requires an exogenous variable");
  }

  bool operator==(const LagConfig&) const = default;
};

inline constexpr std::size_t kDefaultHidden = 7;

struct TrainConfig {
  std::size_t iterations = 1000;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  double init_scale = 0.5;

  void validate() const {
    if (iterations < 1) throw Error(ErrorKind::Config, "iterations must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw Error(ErrorKind::Config, "learning rate must be a finite non-negative number");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorKind::Config, "momentum must lie in [0, 1)");
    if (!(init_scale > 0.0)) throw Error(ErrorKind::Config, "init scale must be positive");
  }
};

struct Network {
  Eigen::MatrixXd w1;     // hidden x input
  Eigen::VectorXd b1;     // hidden
  Eigen::RowVectorXd w2;  // 1 x hidden
  double b2 = 0.0;
  double beta = 1.0;
  LagConfig lag;
  Variable target = Variable::IfInOctets;
  Scaler scaler;  // target first, then the exogenous variable when nb > 0
  // Residual standard deviation (original units) from training, if known.
  std::optional<double> residual_std;

  std::size_t input_width() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden_width() const { return static_cast<std::size_t>(w1.rows()); }
};

inline std::vector<Variable> model_variables(Variable target, const LagConfig& lag) {
  std::vector<Variable> vars{target};
  if (lag.nb > 0 && lag.exogenous && *lag.exogenous != target) vars.push_back(*lag.exogenous);
  return vars;
}

// Uniform weights in [-init_scale, init_scale], seeded.
inline Network make_network(const LagConfig& lag, Variable target, Scaler scaler, const TrainConfig& cfg,
                            std::size_t hidden = kDefaultHidden) {
  lag.validate();
  cfg.validate();
  if (hidden < 1) throw Error(ErrorKind::Config, "hidden width must be at least 1");
  const auto in = static_cast<Eigen::Index>(lag.input_width());
  const auto h = static_cast<Eigen::Index>(hidden);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-cfg.init_scale, cfg.init_scale);
  Network net;
  net.w1.resize(h, in);
  net.b1.resize(h);
  net.w2.resize(h);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < in; ++j) net.w1(i, j) = dist(rng);
  for (Eigen::Index i = 0; i < h; ++i) net.b1(i) = dist(rng);
  for (Eigen::Index i = 0; i < h; ++i) net.w2(i) = dist(rng);
  net.b2 = dist(rng);
  net.lag = lag;
  net.target = target;
  net.scaler = std::move(scaler);
  return net;
}

inline double sigmoid(double x, double beta = 1.0) { return 1.0 / (1.0 + std::exp(-beta * x)); }

inline double forward(const Network& net, std::span<const double> input) {
  if (input.size() != net.input_width())
    throw Error(ErrorKind::Dimension, "expected " + std::to_string(net.input_width()) + " inputs, got " + std::to_string(input.size()));
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  const Eigen::VectorXd z = net.w1 * x + net.b1;
  const Eigen::VectorXd hidden = z.unaryExpr([&](double v) { return sigmoid(v, net.beta); });
  return net.w2.dot(hidden) + net.b2;
}

// Row-wise forward pass over an n x input matrix.
inline Eigen::VectorXd forward_batch(const Network& net, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != net.input_width())
    throw Error(ErrorKind::Dimension, "regressor width does not match the network");
  Eigen::MatrixXd z = (x * net.w1.transpose()).rowwise() + net.b1.transpose();
  const Eigen::MatrixXd hidden = z.unaryExpr([&](double v) { return sigmoid(v, net.beta); });
  return (hidden * net.w2.transpose()).array() + net.b2;
}

struct RegressionSet {
  Eigen::MatrixXd x;                      // n x (na + nb), scaled
  Eigen::VectorXd y;                      // n, scaled
  std::vector<std::int64_t> timestamps;   // timestamp of each target
  std::vector<std::size_t> target_index;  // index of each target in the source series

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
};

// Lagged regressors from raw (unscaled) target and exogenous columns.
inline RegressionSet build_regressors(std::span<const double> target, std::span<const double> exogenous,
                                      std::span<const std::int64_t> timestamps, const LagConfig& lag,
                                      const Scaler& scaler, Variable target_var) {
  lag.validate();
  const std::size_t start = lag.first_target();
  if (target.size() <= start)
    throw Error(ErrorKind::InsufficientData, "series of length " + std::to_string(target.size()) +
                                                 " is too short for lags starting at " + std::to_string(start));
  const std::size_t rows = target.size() - start;
  RegressionSet set;
  set.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(lag.input_width()));
  set.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = start + r;
    const auto row = static_cast<Eigen::Index>(r);
    for (std::size_t i = 0; i < lag.na; ++i)
      set.x(row, static_cast<Eigen::Index>(i)) = scaler.scale(target_var, target[t - 1 - i]);
    for (std::size_t i = 0; i < lag.nb; ++i)
      set.x(row, static_cast<Eigen::Index>(lag.na + i)) = scaler.scale(*lag.exogenous, exogenous[t - lag.nk - i]);
    set.y(row) = scaler.scale(target_var, target[t]);
    set.timestamps.push_back(timestamps[t]);
    set.target_index.push_back(t);
  }
  return set;
}

inline RegressionSet build_regressors(const Dataset& series, Variable target, const LagConfig& lag,
                                      const Scaler& scaler) {
  if (series.mode() != CounterMode::Delta) throw Error(ErrorKind::Config, "regressors are built from delta data");
  lag.validate();
  const auto y = series.column(target);
  const auto u = lag.nb > 0 ? series.column(*lag.exogenous) : std::vector<double>{};
  const auto ts = series.timestamps();
  return build_regressors(y, u, ts, lag, scaler, target);
}

inline RegressionSet build_regressors(const Dataset& series, Variable target, const LagConfig& lag) {
  lag.validate();
  return build_regressors(series, target, lag, fit_scaler(series, model_variables(target, lag)));
}

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::RowVectorXd w2;
  double b2 = 0.0;
};

// Mean squared error over the batch and its gradient by backpropagation.
inline std::pair<double, Gradients> loss_and_gradient(const Network& net, const RegressionSet& data) {
  const auto n = static_cast<double>(data.size());
  const Eigen::MatrixXd z = (data.x * net.w1.transpose()).rowwise() + net.b1.transpose();  // n x h
  const Eigen::MatrixXd hidden = z.unaryExpr([&](double v) { return sigmoid(v, net.beta); });
  const Eigen::VectorXd out = (hidden * net.w2.transpose()).array() + net.b2;
  const Eigen::VectorXd err = out - data.y;
  const double loss = err.squaredNorm() / n;

  const Eigen::VectorXd d_out = err * (2.0 / n);
  Gradients g;
  g.w2 = d_out.transpose() * hidden;
  g.b2 = d_out.sum();
  // dL/dz = dL/dout * w2 * beta * h * (1 - h)
  const Eigen::MatrixXd d_z =
      ((d_out * net.w2).array() * hidden.array() * (1.0 - hidden.array()) * net.beta).matrix();
  g.w1 = d_z.transpose() * data.x;
  g.b1 = d_z.colwise().sum().transpose();
  return {loss, g};
}

inline double mse_loss(const Network& net, const RegressionSet& data) {
  return (forward_batch(net, data.x) - data.y).squaredNorm() / static_cast<double>(data.size());
}

struct TrainResult {
  Network net;
  std::vector<double> loss_history;  // loss before each epoch's update
  double final_loss = 0.0;
};

// Full-batch gradient descent with momentum on the MSE.
inline TrainResult train(Network net, const RegressionSet& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw Error(ErrorKind::InsufficientData, "training set is empty");
  if (static_cast<std::size_t>(data.x.cols()) != net.input_width())
    throw Error(ErrorKind::Dimension, "regressor width does not match the network");

  Gradients velocity{Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols()), Eigen::VectorXd::Zero(net.b1.size()),
                     Eigen::RowVectorXd::Zero(net.w2.size()), 0.0};
  TrainResult result;
  result.loss_history.reserve(cfg.iterations);
  for (std::size_t epoch = 0; epoch < cfg.iterations; ++epoch) {
    auto [loss, g] = loss_and_gradient(net, data);
    if (!std::isfinite(loss)) throw DivergenceError(epoch);
    result.loss_history.push_back(loss);

    velocity.w1 = cfg.momentum * velocity.w1 - cfg.learning_rate * g.w1;
    velocity.b1 = cfg.momentum * velocity.b1 - cfg.learning_rate * g.b1;
    velocity.w2 = cfg.momentum * velocity.w2 - cfg.learning_rate * g.w2;
    velocity.b2 = cfg.momentum * velocity.b2 - cfg.learning_rate * g.b2;
    net.w1 += velocity.w1;
    net.b1 += velocity.b1;
    net.w2 += velocity.w2;
    net.b2 += velocity.b2;
  }
  result.final_loss = mse_loss(net, data);
  if (!std::isfinite(result.final_loss)) throw DivergenceError(cfg.iterations);
  result.net = std::move(net);
  return result;
}

struct TimedValue {
  std::int64_t timestamp = 0;
  double value = 0.0;

  bool operator==(const TimedValue&) const = default;
};

// One-step-ahead predictions in original units, one per complete regressor.
inline std::vector<TimedValue> predict_series(const Network& net, const Dataset& series) {
  const auto set = build_regressors(series, net.target, net.lag, net.scaler);
  const Eigen::VectorXd scaled = forward_batch(net, set.x);
  std::vector<TimedValue> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    out.push_back({set.timestamps[i], net.scaler.unscale(net.target, scaled(static_cast<Eigen::Index>(i)))});
  return out;
}

inline std::vector<TimedValue> observed_series(const Dataset& d, Variable v) {
  std::vector<TimedValue> out;
  out.reserve(d.size());
  for (const auto& r : d.records()) out.push_back({r.timestamp, static_cast<double>(r[v])});
  return out;
}

// observed - predicted, element-wise over aligned series.
inline std::vector<TimedValue> residuals(std::span<const TimedValue> observed, std::span<const TimedValue> predicted) {
  if (observed.size() != predicted.size())
    throw Error(ErrorKind::Alignment, "observed and predicted series differ in length");
  std::vector<TimedValue> out;
  out.reserve(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i].timestamp != predicted[i].timestamp)
      throw Error(ErrorKind::Alignment, "timestamps differ at position " + std::to_string(i));
    out.push_back({observed[i].timestamp, observed[i].value - predicted[i].value});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model persistence. Plain text, version 1:
//
//   NNARX v1
//   dims <input> <hidden> 1
//   beta <b>
//   lags <na> <nb> <nk> <exogenous|->
//   scale <variable> <min> <max>        one per model variable, target first
//   <w1 row>                            hidden lines of input values
//   <b1>
//   <w2 row>
//   <b2>
//   residual_std <s>                    optional
// ---------------------------------------------------------------------------

inline constexpr std::string_view kModelMagic = "NNARX";
inline constexpr std::string_view kModelVersion = "v1";

inline std::string save_model(const Network& net) {
  std::ostringstream out;
  auto row = [&](auto begin, auto end) {
    for (auto it = begin; it != end; ++it) {
      if (it != begin) out << ' ';
      out << text::format_double(*it);
    }
    out << '\n';
  };
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "dims " << net.input_width() << ' ' << net.hidden_width() << " 1\n";
  out << "beta " << text::format_double(net.beta) << '\n';
  out << "lags " << net.lag.na << ' ' << net.lag.nb << ' ' << net.lag.nk << ' '
      << (net.lag.exogenous ? name_of(*net.lag.exogenous) : std::string_view("-")) << '\n';
  for (const auto& r : net.scaler.ranges())
    out << "scale " << name_of(r.variable) << ' ' << text::format_double(r.min) << ' ' << text::format_double(r.max) << '\n';
  for (Eigen::Index i = 0; i < net.w1.rows(); ++i) {
    const Eigen::RowVectorXd r = net.w1.row(i);
    row(r.data(), r.data() + r.size());
  }
  row(net.b1.data(), net.b1.data() + net.b1.size());
  row(net.w2.data(), net.w2.data() + net.w2.size());
  out << text::format_double(net.b2) << '\n';
  if (net.residual_std) out << "residual_std " << text::format_double(*net.residual_std) << '\n';
  return out.str();
}

namespace detail {

class ModelReader {
 public:
  explicit ModelReader(std::string_view content) {
    for (auto line : text::split(content, '\n')) {
      if (!text::trim(line).empty()) lines_.push_back(text::trim(line));
    }
  }

  bool done() const { return pos_ >= lines_.size(); }

  std::string_view peek() const { return done() ? std::string_view{} : lines_[pos_]; }

  std::vector<std::string_view> next(const std::string& field) {
    if (done()) throw LoadError(ErrorKind::Load, field, "file is truncated");
    return text::tokens(lines_[pos_++]);
  }

  template <typename T>
  static T number(std::string_view tok, const std::string& field) {
    const auto v = text::parse_number<T>(tok);
    if (!v) throw LoadError(ErrorKind::Load, field, "'" + std::string(tok) + "' is not a valid number");
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(*v)) throw LoadError(ErrorKind::Load, field, "value is not finite");
    }
    return *v;
  }

  std::vector<double> numbers(const std::string& field, std::size_t count) {
    const auto toks = next(field);
    if (toks.size() != count)
      throw LoadError(ErrorKind::Dimension, field, "expected " + std::to_string(count) + " values, got " + std::to_string(toks.size()));
    std::vector<double> out;
    for (auto t : toks) out.push_back(number<double>(t, field));
    return out;
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Network load_model(std::string_view content) {
  detail::ModelReader in(content);
  using R = detail::ModelReader;

  auto header = in.next("header");
  if (header.size() != 2 || header[0] != kModelMagic) throw LoadError(ErrorKind::Load, "header", "not an NNARX model file");
  if (header[1] != kModelVersion)
    throw LoadError(ErrorKind::Version, "header", "unsupported version '" + std::string(header[1]) + "'");

  auto dims = in.next("dims");
  if (dims.size() != 4 || dims[0] != "dims") throw LoadError(ErrorKind::Load, "dims", "malformed line");
  const auto n_in = R::number<std::size_t>(dims[1], "dims");
  const auto n_hidden = R::number<std::size_t>(dims[2], "dims");
  const auto n_out = R::number<std::size_t>(dims[3], "dims");
  if (n_out != 1 || n_in < 1 || n_hidden < 1) throw LoadError(ErrorKind::Dimension, "dims", "unsupported layer sizes");

  Network net;
  auto beta = in.next("beta");
  if (beta.size() != 2 || beta[0] != "beta") throw LoadError(ErrorKind::Load, "beta", "malformed line");
  net.beta = R::number<double>(beta[1], "beta");
  if (!(net.beta > 0.0)) throw LoadError(ErrorKind::Load, "beta", "must be positive");

  auto lags = in.next("lags");
  if (lags.size() != 5 || lags[0] != "lags") throw LoadError(ErrorKind::Load, "lags", "malformed line");
  net.lag.na = R::number<std::size_t>(lags[1], "lags");
  net.lag.nb = R::number<std::size_t>(lags[2], "lags");
  net.lag.nk = R::number<std::size_t>(lags[3], "lags");
  if (lags[4] != "-") {
    const auto v = variable_from_name(lags[4]);
    if (!v) throw LoadError(ErrorKind::Schema, "lags", "unknown variable '" + std::string(lags[4]) + "'");
    net.lag.exogenous = v;
  }
  try {
    net.lag.validate();
  } catch (const Error& e) {
    throw LoadError(ErrorKind::Load, "lags", e.what());
  }
  if (net.lag.input_width() != n_in) throw LoadError(ErrorKind::Dimension, "lags", "na + nb does not match dims");

  std::vector<Scaler::Range> ranges;
  while (!in.done() && in.peek().starts_with("scale ")) {
    auto s = in.next("scale");
    if (s.size() != 4) throw LoadError(ErrorKind::Load, "scale", "malformed line");
    const auto v = variable_from_name(s[1]);
    if (!v) throw LoadError(ErrorKind::Schema, "scale", "unknown variable '" + std::string(s[1]) + "'");
    const double lo = R::number<double>(s[2], "scale " + std::string(s[1]));
    const double hi = R::number<double>(s[3], "scale " + std::string(s[1]));
    if (hi < lo) throw LoadError(ErrorKind::Load, "scale " + std::string(s[1]), "max below min");
    ranges.push_back({*v, lo, hi});
  }
  if (ranges.empty()) throw LoadError(ErrorKind::Load, "scale", "no scaler lines");
  net.target = ranges.front().variable;
  net.scaler = Scaler(std::move(ranges));
  if (net.lag.nb > 0 && !net.scaler.contains(*net.lag.exogenous))
    throw LoadError(ErrorKind::Schema, "scale", "exogenous variable has no scaler line");

  const auto h = static_cast<Eigen::Index>(n_hidden);
  const auto w = static_cast<Eigen::Index>(n_in);
  net.w1.resize(h, w);
  for (Eigen::Index i = 0; i < h; ++i) {
    const auto row = in.numbers("W1 row " + std::to_string(i + 1), n_in);
    for (Eigen::Index j = 0; j < w; ++j) net.w1(i, j) = row[static_cast<std::size_t>(j)];
  }
  const auto b1 = in.numbers("b1", n_hidden);
  net.b1 = Eigen::Map<const Eigen::VectorXd>(b1.data(), h);
  const auto w2 = in.numbers("W2", n_hidden);
  net.w2 = Eigen::Map<const Eigen::RowVectorXd>(w2.data(), h);
  net.b2 = in.numbers("b2", 1).front();

  if (!in.done()) {
    auto extra = in.next("residual_std");
    if (extra.size() != 2 || extra[0] != "residual_std") throw LoadError(ErrorKind::Load, "residual_std", "unexpected trailing content");
    const double s = R::number<double>(extra[1], "residual_std");
    if (s < 0.0) throw LoadError(ErrorKind::Load, "residual_std", "must be non-negative");
    net.residual_std = s;
  }
  if (!in.done()) throw LoadError(ErrorKind::Load, "trailer", "unexpected trailing content");
  return net;
}

}  // namespace mibwatch
