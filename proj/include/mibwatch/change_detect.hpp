#pragma once

// Shewhart-style control chart over a residual stream. Limits are fitted on
// a learning window and applied to the following testing window of the same
// size; windows are consecutive and non-overlapping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mibwatch/error.hpp"
#include "mibwatch/metrics.hpp"
#include "mibwatch/nnarx.hpp"

namespace mibwatch {

struct ControlLimits {
  double mean = 0.0;
  double sigma = 0.0;
  double k = 3.0;
  double cl = 0.0;
  double ucl = 0.0;
  double lcl = 0.0;
};

inline ControlLimits control_limits(std::span<const double> window, double k, double sigma_floor = 0.0) {
  if (window.size() < 2) throw Error(ErrorKind::InsufficientData, "a learning window needs at least two samples");
  if (!(k > 0.0)) throw Error(ErrorKind::Config, "k must be positive");
  if (!(sigma_floor >= 0.0)) throw Error(ErrorKind::Config, "sigma floor must be non-negative");

  const auto n = static_cast<double>(window.size());
  double sum = 0.0;
  for (double x : window) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : window) ss += (x - mean) * (x - mean);
  const double sigma = std::max(std::sqrt(ss / (n - 1.0)), sigma_floor);

  ControlLimits lim;
  lim.mean = mean;
  lim.sigma = sigma;
  lim.k = k;
  lim.cl = mean;
  lim.ucl = mean + k * sigma;
  lim.lcl = mean - k * sigma;
  return lim;
}

enum class Violation { Upper, Lower };

inline std::string_view name_of(Violation v) { return v == Violation::Upper ? "upper" : "lower"; }

struct AlarmEvent {
  std::size_t window_index = 0;
  std::size_t sample_index = 0;  // position in the residual stream
  std::int64_t timestamp = 0;
  double value = 0.0;
  Violation violated = Violation::Upper;
  ControlLimits limits;
};

// Strict comparison: a value exactly on a limit is in control.
inline std::optional<Violation> check_sample(const ControlLimits& lim, double x) {
  if (x > lim.ucl) return Violation::Upper;
  if (x < lim.lcl) return Violation::Lower;
  return std::nullopt;
}

inline std::vector<AlarmEvent> detect_window(const ControlLimits& lim, std::span<const double> window,
                                             std::size_t window_index = 0, std::size_t first_sample = 0) {
  std::vector<AlarmEvent> out;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (auto side = check_sample(lim, window[i]))
      out.push_back({window_index, first_sample + i, 0, window[i], *side, lim});
  }
  return out;
}

enum class BaselineUpdate { Always, CleanOnly };

inline std::string_view name_of(BaselineUpdate b) { return b == BaselineUpdate::Always ? "always" : "clean-only"; }

inline std::optional<BaselineUpdate> baseline_update_from_name(std::string_view s) {
  if (s == "always") return BaselineUpdate::Always;
  if (s == "clean-only" || s == "clean") return BaselineUpdate::CleanOnly;
  return std::nullopt;
}

struct WindowConfig {
  std::size_t window_size = 9;
  double k = 3.0;
  double sigma_floor = 1e-9;
  BaselineUpdate baseline_update = BaselineUpdate::CleanOnly;

  void validate() const {
    if (window_size < 2) throw Error(ErrorKind::Config, "window size must be at least 2");
    if (!(k > 0.0)) throw Error(ErrorKind::Config, "k must be positive");
    if (!(sigma_floor >= 0.0)) throw Error(ErrorKind::Config, "sigma floor must be non-negative");
  }
};

// Outcome of one testing window.
struct WindowVerdict {
  std::size_t window_index = 0;  // 1-based: window 0 is the initial learning window
  std::size_t first_sample = 0;
  std::int64_t start_timestamp = 0;
  std::int64_t end_timestamp = 0;
  WindowFlag flag = WindowFlag::Clear;
  std::size_t alarms = 0;
  ControlLimits limits;
};

// Sequential fold of the learn/test window pairing. Each sample of a testing
// window is judged as soon as it arrives, since the limits are fixed for the
// whole window; the baseline moves when the window completes.
class ControlChart {
 public:
  explicit ControlChart(WindowConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    window_.reserve(cfg_.window_size);
  }

  const WindowConfig& config() const noexcept { return cfg_; }
  const std::optional<ControlLimits>& baseline() const noexcept { return baseline_; }
  const std::vector<AlarmEvent>& alarms() const noexcept { return alarms_; }
  const std::vector<WindowVerdict>& verdicts() const noexcept { return verdicts_; }
  std::size_t samples_seen() const noexcept { return seen_; }

  std::optional<AlarmEvent> push(std::int64_t timestamp, double value) {
    if (window_.empty()) window_start_ = timestamp;
    window_.push_back(value);
    std::optional<AlarmEvent> alarm;
    if (baseline_) {
      if (auto side = check_sample(*baseline_, value)) {
        alarm = AlarmEvent{window_index_, seen_, timestamp, value, *side, *baseline_};
        alarms_.push_back(*alarm);
        ++window_alarms_;
      }
    }
    ++seen_;
    if (window_.size() == cfg_.window_size) close_window(timestamp);
    return alarm;
  }

 private:
  void close_window(std::int64_t end_timestamp) {
    const auto limits = control_limits(window_, cfg_.k, cfg_.sigma_floor);
    if (!baseline_) {
      baseline_ = limits;
    } else {
      const bool clean = window_alarms_ == 0;
      verdicts_.push_back({window_index_, seen_ - window_.size(), window_start_, end_timestamp,
                           clean ? WindowFlag::Clear : WindowFlag::Flagged, window_alarms_, *baseline_});
      if (cfg_.baseline_update == BaselineUpdate::Always || clean) baseline_ = limits;
    }
    window_.clear();
    window_alarms_ = 0;
    ++window_index_;
  }

  WindowConfig cfg_;
  std::vector<double> window_;
  std::optional<ControlLimits> baseline_;
  std::vector<AlarmEvent> alarms_;
  std::vector<WindowVerdict> verdicts_;
  std::size_t window_index_ = 0;
  std::size_t window_alarms_ = 0;
  std::size_t seen_ = 0;
  std::int64_t window_start_ = 0;
};

struct StreamResult {
  std::vector<AlarmEvent> alarms;
  std::vector<WindowVerdict> windows;

  std::vector<WindowFlag> flags() const {
    std::vector<WindowFlag> out;
    for (const auto& w : windows) out.push_back(w.flag);
    return out;
  }
};

// The trailing partial window is dropped.
inline StreamResult stream_detect(std::span<const TimedValue> residuals, const WindowConfig& cfg) {
  cfg.validate();
  if (residuals.size() < 2 * cfg.window_size)
    throw Error(ErrorKind::InsufficientData, "need at least two full windows (" + std::to_string(2 * cfg.window_size) +
                                                 " samples), got " + std::to_string(residuals.size()));
  const std::size_t usable = residuals.size() - residuals.size() % cfg.window_size;
  ControlChart chart(cfg);
  for (std::size_t i = 0; i < usable; ++i) chart.push(residuals[i].timestamp, residuals[i].value);
  return {chart.alarms(), chart.verdicts()};
}

}  // namespace mibwatch
