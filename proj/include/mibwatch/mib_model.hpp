#pragma once

// SNMP interface-group dataset: schema, CSV I/O, counter deltas, summary
// statistics and min-max scaling.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mibwatch/error.hpp"
#include "mibwatch/text.hpp"

namespace mibwatch {

inline constexpr std::int64_t kPollIntervalSeconds = 15;
inline constexpr std::uint64_t kCounterModulus = std::uint64_t{1} << 32;

enum class Variable : std::size_t {
  IfInOctets,
  IfOutOctets,
  IfOutDiscards,
  IfInUcastPkts,
  IfInNUcastPkts,
  IfInDiscards,
  IfOutUcastPkts,
  IfOutNUcastPkts,
  TcpOutRsts,
};

inline constexpr std::size_t kVariableCount = 9;

inline constexpr std::array<std::string_view, kVariableCount> kVariableNames = {
    "ifInOctets",     "ifOutOctets",    "ifOutDiscards",   "ifInUcastPkts", "ifInNUcastPkts",
    "ifInDiscards",   "ifOutUcastPkts", "ifOutNUcastPkts", "tcpOutRsts",
};

inline constexpr std::array<Variable, kVariableCount> kAllVariables = {
    Variable::IfInOctets,     Variable::IfOutOctets,    Variable::IfOutDiscards,
    Variable::IfInUcastPkts,  Variable::IfInNUcastPkts, Variable::IfInDiscards,
    Variable::IfOutUcastPkts, Variable::IfOutNUcastPkts, Variable::TcpOutRsts,
};

constexpr std::size_t index_of(Variable v) { return static_cast<std::size_t>(v); }

inline std::string_view name_of(Variable v) { return kVariableNames[index_of(v)]; }

inline std::optional<Variable> variable_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kVariableCount; ++i)
    if (kVariableNames[i] == name) return kAllVariables[i];
  return std::nullopt;
}

enum class TrafficClass { Normal, TcpSyn, UdpFlood, IcmpEcho, HttpFlood, Slowloris, Slowpost, BruteForce };

inline constexpr std::array<TrafficClass, 8> kAllTrafficClasses = {
    TrafficClass::Normal,    TrafficClass::TcpSyn,    TrafficClass::UdpFlood, TrafficClass::IcmpEcho,
    TrafficClass::HttpFlood, TrafficClass::Slowloris, TrafficClass::Slowpost, TrafficClass::BruteForce,
};

// Canonical CSV spelling.
inline std::string_view name_of(TrafficClass c) {
  switch (c) {
    case TrafficClass::Normal: return "Normal";
    case TrafficClass::TcpSyn: return "TCP-SYN";
    case TrafficClass::UdpFlood: return "UDP-flood";
    case TrafficClass::IcmpEcho: return "ICMP-ECHO";
    case TrafficClass::HttpFlood: return "HTTP-flood";
    case TrafficClass::Slowloris: return "Slowloris";
    case TrafficClass::Slowpost: return "Slowpost";
    case TrafficClass::BruteForce: return "Brute-force";
  }
  return "?";
}

// Accepts the canonical names and the usual variants ("UDP flood",
// "udp_flood", "TcpSyn"): case and punctuation are ignored.
inline std::optional<TrafficClass> traffic_class_from_name(std::string_view name) {
  auto fold = [](std::string_view s) {
    std::string out;
    for (char ch : s)
      if (std::isalnum(static_cast<unsigned char>(ch)))
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    return out;
  };
  const auto key = fold(name);
  if (key.empty()) return std::nullopt;
  for (auto c : kAllTrafficClasses)
    if (fold(name_of(c)) == key) return c;
  return std::nullopt;
}

struct MibRecord {
  std::int64_t timestamp = 0;
  std::array<std::uint64_t, kVariableCount> counters{};
  TrafficClass label = TrafficClass::Normal;

  std::uint64_t operator[](Variable v) const { return counters[index_of(v)]; }
  std::uint64_t& operator[](Variable v) { return counters[index_of(v)]; }

  bool operator==(const MibRecord&) const = default;
};

enum class CounterMode { Cumulative, Delta };

// Non-empty, 15 s poll grid, homogeneous mode. Delta datasets hold
// per-interval counts that fit a 32-bit counter.
class Dataset {
 public:
  Dataset(std::vector<MibRecord> records, CounterMode mode) : records_(std::move(records)), mode_(mode) {
    if (records_.empty()) throw Error(ErrorKind::EmptyDataset, "dataset has no records");
    for (std::size_t i = 1; i < records_.size(); ++i) {
      if (records_[i].timestamp != records_[i - 1].timestamp + kPollIntervalSeconds)
        throw Error(ErrorKind::InvalidData, "record " + std::to_string(i) + " breaks the 15 s poll grid");
    }
    if (mode_ == CounterMode::Delta) {
      for (const auto& r : records_)
        for (auto c : r.counters)
          if (c >= kCounterModulus)
            throw Error(ErrorKind::InvalidData, "delta value exceeds the 32-bit per-interval range");
    }
  }

  CounterMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<MibRecord>& records() const noexcept { return records_; }
  const MibRecord& operator[](std::size_t i) const { return records_[i]; }

  std::vector<double> column(Variable v) const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(static_cast<double>(r[v]));
    return out;
  }

  std::vector<std::int64_t> timestamps() const {
    std::vector<std::int64_t> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.timestamp);
    return out;
  }

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<MibRecord> records_;
  CounterMode mode_;
};

inline std::string csv_header() {
  std::string h = "timestamp";
  for (auto n : kVariableNames) {
    h += ',';
    h += n;
  }
  h += ",label";
  return h;
}

inline Dataset parse_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!text::trim(line).empty()) break;
  }
  if (line_no == 0 || text::trim(line).empty()) throw Error(ErrorKind::EmptyDataset, "input is empty");
  if (text::trim(line) != csv_header()) throw ParseError(line_no, "unexpected header");

  constexpr std::size_t arity = kVariableCount + 2;
  std::vector<MibRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = text::trim(line);
    if (row.empty()) continue;
    const auto fields = text::split(row, ',');
    if (fields.size() != arity)
      throw ParseError(line_no, "expected " + std::to_string(arity) + " fields, got " + std::to_string(fields.size()));

    MibRecord rec;
    const auto ts = text::parse_number<std::int64_t>(fields[0]);
    if (!ts) throw ParseError(line_no, "timestamp is not an integer");
    rec.timestamp = *ts;
    for (std::size_t i = 0; i < kVariableCount; ++i) {
      const auto v = text::parse_number<std::uint64_t>(fields[i + 1]);
      if (!v) throw ParseError(line_no, std::string(kVariableNames[i]) + " is not a non-negative integer");
      rec.counters[i] = *v;
    }
    const auto label = traffic_class_from_name(text::trim(fields[arity - 1]));
    if (!label) throw ParseError(line_no, "unknown label '" + std::string(text::trim(fields[arity - 1])) + "'");
    rec.label = *label;

    if (!records.empty() && rec.timestamp != records.back().timestamp + kPollIntervalSeconds)
      throw ParseError(line_no, "timestamp does not follow the previous row by 15 s");
    records.push_back(rec);
  }
  if (records.empty()) throw Error(ErrorKind::EmptyDataset, "no data rows after header");
  return Dataset(std::move(records), CounterMode::Cumulative);
}

inline Dataset parse_dataset(std::string_view csv_text) {
  std::istringstream in{std::string(csv_text)};
  return parse_dataset(in);
}

inline void write_dataset(std::ostream& out, const Dataset& d) {
  out << csv_header() << '\n';
  for (const auto& r : d.records()) {
    out << r.timestamp;
    for (auto c : r.counters) out << ',' << c;
    out << ',' << name_of(r.label) << '\n';
  }
}

inline std::string to_csv(const Dataset& d) {
  std::ostringstream out;
  write_dataset(out, d);
  return out.str();
}

// Per-interval differences with 32-bit wrap correction. Output record i
// carries the timestamp and label of input record i + 1.
inline Dataset counter_deltas(const Dataset& d) {
  if (d.mode() != CounterMode::Cumulative) throw Error(ErrorKind::Config, "counter_deltas needs cumulative counters");
  if (d.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least two polls to form a delta");

  std::vector<MibRecord> out;
  out.reserve(d.size() - 1);
  for (std::size_t i = 1; i < d.size(); ++i) {
    MibRecord rec;
    rec.timestamp = d[i].timestamp;
    rec.label = d[i].label;
    for (std::size_t v = 0; v < kVariableCount; ++v) {
      const auto prev = d[i - 1].counters[v];
      const auto cur = d[i].counters[v];
      if (cur >= prev) {
        rec.counters[v] = cur - prev;
      } else {
        if (prev - cur > kCounterModulus)
          throw Error(ErrorKind::InvalidData, std::string(kVariableNames[v]) + " decreased by more than one 32-bit wrap at record " + std::to_string(i));
        rec.counters[v] = cur + kCounterModulus - prev;
      }
    }
    out.push_back(rec);
  }
  return Dataset(std::move(out), CounterMode::Delta);
}

// Inverse of counter_deltas: accumulates deltas onto `initial` modulo 2^32.
// The result has one more record than `deltas`; the first is `initial`.
inline Dataset accumulate_counters(const Dataset& deltas, MibRecord initial) {
  if (deltas.mode() != CounterMode::Delta) throw Error(ErrorKind::Config, "accumulate_counters needs delta counters");
  initial.timestamp = deltas[0].timestamp - kPollIntervalSeconds;
  for (auto& c : initial.counters) c %= kCounterModulus;

  std::vector<MibRecord> out;
  out.reserve(deltas.size() + 1);
  out.push_back(initial);
  for (const auto& r : deltas.records()) {
    MibRecord next = r;
    for (std::size_t v = 0; v < kVariableCount; ++v)
      next.counters[v] = (out.back().counters[v] + r.counters[v]) % kCounterModulus;
    out.push_back(next);
  }
  return Dataset(std::move(out), CounterMode::Cumulative);
}

struct VariableStats {
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;
};

struct VariableSummary {
  std::array<VariableStats, kVariableCount> stats{};

  const VariableStats& operator[](Variable v) const { return stats[index_of(v)]; }
};

// Min, max and sample standard deviation (n - 1) per variable. Uses
// Welford's update so large counter values do not lose precision.
inline VariableSummary summarize(const Dataset& d) {
  if (d.size() < 2) throw Error(ErrorKind::InsufficientData, "standard deviation needs at least two records");
  VariableSummary s;
  for (std::size_t v = 0; v < kVariableCount; ++v) {
    double mean = 0.0, m2 = 0.0;
    double lo = static_cast<double>(d[0].counters[v]), hi = lo;
    std::size_t n = 0;
    for (const auto& r : d.records()) {
      const double x = static_cast<double>(r.counters[v]);
      ++n;
      const double delta = x - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (x - mean);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    s.stats[v] = {lo, hi, std::sqrt(std::max(0.0, m2) / static_cast<double>(n - 1))};
  }
  return s;
}

// Affine map of each fitted variable onto [0, 1]. A constant variable
// (max == min) maps to 0 and inverts back to its constant.
class Scaler {
 public:
  struct Range {
    Variable variable;
    double min;
    double max;
  };

  Scaler() = default;
  explicit Scaler(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
    for (const auto& r : ranges_) {
      if (!(r.max >= r.min) || !std::isfinite(r.min) || !std::isfinite(r.max))
        throw Error(ErrorKind::Config, "scaler range for " + std::string(name_of(r.variable)) + " is invalid");
    }
  }

  const std::vector<Range>& ranges() const noexcept { return ranges_; }

  bool contains(Variable v) const {
    return std::any_of(ranges_.begin(), ranges_.end(), [v](const Range& r) { return r.variable == v; });
  }

  const Range& range(Variable v) const {
    for (const auto& r : ranges_)
      if (r.variable == v) return r;
    throw Error(ErrorKind::Schema, "scaler was not fitted on " + std::string(name_of(v)));
  }

  double scale(Variable v, double x) const {
    const auto& r = range(v);
    const double span = r.max - r.min;
    return span > 0.0 ? (x - r.min) / span : 0.0;
  }

  double unscale(Variable v, double s) const {
    const auto& r = range(v);
    return r.min + s * (r.max - r.min);
  }

  // Restriction to the listed variables, in that order.
  Scaler subset(std::span<const Variable> vars) const {
    std::vector<Range> out;
    for (auto v : vars) out.push_back(range(v));
    return Scaler(std::move(out));
  }

 private:
  std::vector<Range> ranges_;
};

inline Scaler fit_scaler(const Dataset& d, std::span<const Variable> vars = kAllVariables) {
  if (d.mode() != CounterMode::Delta) throw Error(ErrorKind::Config, "scalers are fitted on delta data");
  std::vector<Scaler::Range> ranges;
  for (auto v : vars) {
    double lo = static_cast<double>(d[0][v]), hi = lo;
    for (const auto& r : d.records()) {
      lo = std::min(lo, static_cast<double>(r[v]));
      hi = std::max(hi, static_cast<double>(r[v]));
    }
    ranges.push_back({v, lo, hi});
  }
  return Scaler(std::move(ranges));
}

// All nine variables as real-valued columns, either scaled or in original
// units.
struct ScaledTable {
  std::vector<std::int64_t> timestamps;
  std::array<std::vector<double>, kVariableCount> columns;

  const std::vector<double>& operator[](Variable v) const { return columns[index_of(v)]; }
};

inline ScaledTable apply_scaler(const Scaler& s, const Dataset& d) {
  ScaledTable t;
  t.timestamps = d.timestamps();
  for (auto v : kAllVariables) {
    if (!s.contains(v)) throw Error(ErrorKind::Schema, "data has variable " + std::string(name_of(v)) + " unseen by the scaler");
    auto& col = t.columns[index_of(v)];
    col.reserve(d.size());
    for (const auto& r : d.records()) col.push_back(s.scale(v, static_cast<double>(r[v])));
  }
  return t;
}

inline ScaledTable invert_scaler(const Scaler& s, const ScaledTable& scaled) {
  ScaledTable t;
  t.timestamps = scaled.timestamps;
  for (auto v : kAllVariables) {
    if (!s.contains(v)) throw Error(ErrorKind::Schema, "data has variable " + std::string(name_of(v)) + " unseen by the scaler");
    auto& col = t.columns[index_of(v)];
    for (double x : scaled[v]) col.push_back(s.unscale(v, x));
  }
  return t;
}

}  // namespace mibwatch
