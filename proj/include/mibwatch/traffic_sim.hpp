#pragma once

// Synthetic labeled SNMP interface traffic: a stationary AR(1) baseline per
// variable with attack episodes injected as multiplicative surges.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mibwatch/error.hpp"
#include "mibwatch/mib_model.hpp"
#include "mibwatch/text.hpp"

namespace mibwatch {

struct BaselineParams {
  // Mean count per 15 s interval.
  std::array<double, kVariableCount> mean{};
  // Stationary coefficient of variation of each variable.
  std::array<double, kVariableCount> noise{};
  double ar = 0.6;
  std::uint64_t seed = 42;
  std::int64_t start_timestamp = 1'500'000'000;

  void validate() const {
    for (std::size_t v = 0; v < kVariableCount; ++v) {
      if (!(mean[v] >= 0.0) || !std::isfinite(mean[v]))
        throw Error(ErrorKind::Config, "mean rate of " + std::string(kVariableNames[v]) + " must be non-negative");
      if (!(noise[v] >= 0.0 && noise[v] < 1.0))
        throw Error(ErrorKind::Config, "noise fraction of " + std::string(kVariableNames[v]) + " must lie in [0, 1)");
    }
    if (!(ar >= 0.0 && ar < 1.0)) throw Error(ErrorKind::Config, "ar coefficient must lie in [0, 1)");
    if (start_timestamp % kPollIntervalSeconds != 0)
      throw Error(ErrorKind::Config, "start timestamp must sit on the 15 s grid");
  }
};

// A lightly loaded edge link: ~1 Mbit/s inbound.
inline BaselineParams default_baseline() {
  BaselineParams p;
  p.mean = {1'800'000, 900'000, 40, 2'400, 60, 40, 1'500, 15, 2};
  p.noise.fill(0.05);
  return p;
}

// Per-interval counters the simulator starts accumulating from. ifInOctets
// starts close to 2^32 so emitted cumulative files exercise counter wrap.
inline MibRecord default_initial_counters() {
  MibRecord r;
  r.counters = {4'294'000'000, 161'843, 0, 701'369, 2'735, 0, 223'076, 796, 1};
  return r;
}

inline Dataset gen_normal(const BaselineParams& p, std::size_t n) {
  p.validate();
  if (n < 1) throw Error(ErrorKind::Config, "cannot generate an empty dataset");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double innovation_scale = std::sqrt(1.0 - p.ar * p.ar);

  std::array<double, kVariableCount> state{};
  std::vector<MibRecord> records(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto& rec = records[t];
    rec.timestamp = p.start_timestamp + static_cast<std::int64_t>(t) * kPollIntervalSeconds;
    for (std::size_t v = 0; v < kVariableCount; ++v) {
      const double mu = p.mean[v];
      const double sd = p.noise[v] * mu;
      const double eps = gauss(rng);
      state[v] = t == 0 ? mu + sd * eps : mu + p.ar * (state[v] - mu) + sd * innovation_scale * eps;
      const double emitted = std::max(0.0, std::round(state[v]));
      rec.counters[v] = static_cast<std::uint64_t>(std::min(emitted, static_cast<double>(kCounterModulus - 1)));
    }
  }
  return Dataset(std::move(records), CounterMode::Delta);
}

enum class AttackShape { Step, Ramp, SustainedLow };

inline std::string_view name_of(AttackShape s) {
  switch (s) {
    case AttackShape::Step: return "step";
    case AttackShape::Ramp: return "ramp";
    case AttackShape::SustainedLow: return "sustained-low";
  }
  return "?";
}

inline std::optional<AttackShape> attack_shape_from_name(std::string_view s) {
  if (s == "step") return AttackShape::Step;
  if (s == "ramp") return AttackShape::Ramp;
  if (s == "sustained-low" || s == "sustained_low") return AttackShape::SustainedLow;
  return std::nullopt;
}

struct AttackSpec {
  TrafficClass cls = TrafficClass::UdpFlood;
  std::size_t start = 0;
  std::size_t duration = 1;
  double intensity = 5.0;
  AttackShape shape = AttackShape::Step;
};

// Weight 1 marks a variable that surges by the full intensity, smaller
// weights a partial rise: factor = 1 + weight * (intensity - 1).
struct AffectedVariable {
  Variable variable;
  double weight;
};

inline std::vector<AffectedVariable> affected_variables(TrafficClass c) {
  using V = Variable;
  switch (c) {
    case TrafficClass::TcpSyn:  // many small SYN segments, RSTs on half-open sockets
      return {{V::IfInUcastPkts, 1.0}, {V::IfInOctets, 0.3}, {V::TcpOutRsts, 0.3}};
    case TrafficClass::UdpFlood:
      return {{V::IfInOctets, 1.0}, {V::IfInUcastPkts, 1.0}};
    case TrafficClass::IcmpEcho:
      return {{V::IfInNUcastPkts, 1.0}, {V::IfInOctets, 1.0}};
    case TrafficClass::HttpFlood:
      return {{V::IfInOctets, 1.0}, {V::IfOutOctets, 1.0}};
    case TrafficClass::Slowloris:
    case TrafficClass::Slowpost:  // many held-open connections trickling headers or bodies
      return {{V::IfInUcastPkts, 1.0}, {V::IfInOctets, 0.3}};
    case TrafficClass::BruteForce:
      return {{V::IfInUcastPkts, 0.5}};
    case TrafficClass::Normal:
      break;
  }
  return {};
}

// Share of the surge applied by the sustained-low profile.
inline constexpr double kSustainedLowFraction = 0.25;

inline double surge_factor(AttackShape shape, double weight, double intensity, std::size_t i, std::size_t duration) {
  const double full = weight * (intensity - 1.0);
  switch (shape) {
    case AttackShape::Step: return 1.0 + full;
    case AttackShape::Ramp: return 1.0 + full * static_cast<double>(i + 1) / static_cast<double>(duration);
    case AttackShape::SustainedLow: return 1.0 + full * kSustainedLowFraction;
  }
  return 1.0;
}

inline Dataset inject_attack(const Dataset& d, const AttackSpec& spec) {
  if (d.mode() != CounterMode::Delta) throw Error(ErrorKind::Config, "attacks are injected into delta data");
  if (spec.cls == TrafficClass::Normal) throw Error(ErrorKind::Config, "attack class must not be Normal");
  if (!(spec.intensity > 1.0) || !std::isfinite(spec.intensity))
    throw Error(ErrorKind::Config, "attack intensity must exceed 1");
  if (spec.duration < 1) throw Error(ErrorKind::Config, "attack duration must be at least 1");
  if (spec.start >= d.size() || spec.duration > d.size() - spec.start)
    throw Error(ErrorKind::Bounds, "attack [" + std::to_string(spec.start) + ", " +
                                       std::to_string(spec.start + spec.duration) + ") does not fit a dataset of " +
                                       std::to_string(d.size()) + " records");

  auto records = d.records();
  for (std::size_t i = 0; i < spec.duration; ++i) {
    if (records[spec.start + i].label != TrafficClass::Normal)
      throw Error(ErrorKind::Overlap, "attack overlaps an existing episode at record " + std::to_string(spec.start + i));
  }
  const auto affected = affected_variables(spec.cls);
  for (std::size_t i = 0; i < spec.duration; ++i) {
    auto& rec = records[spec.start + i];
    for (const auto& a : affected) {
      const double f = surge_factor(spec.shape, a.weight, spec.intensity, i, spec.duration);
      const double scaled = std::round(static_cast<double>(rec[a.variable]) * f);
      if (scaled >= static_cast<double>(kCounterModulus))
        throw Error(ErrorKind::Bounds, "surge pushes " + std::string(name_of(a.variable)) + " past the 32-bit range");
      rec[a.variable] = static_cast<std::uint64_t>(scaled);
    }
    rec.label = spec.cls;
  }
  return Dataset(std::move(records), CounterMode::Delta);
}

struct ScenarioConfig {
  std::size_t length = 0;
  BaselineParams baseline = default_baseline();
  std::vector<AttackSpec> attacks;
};

inline Dataset gen_scenario(const ScenarioConfig& cfg) {
  auto d = gen_normal(cfg.baseline, cfg.length);
  for (const auto& a : cfg.attacks) d = inject_attack(d, a);
  return d;
}

// ---------------------------------------------------------------------------
// Scenario files: `key = value` lines, `#` comments, one `[attack]` block per
// episode. Top-level keys: length, seed, ar, start_timestamp, noise,
// mean.<variable>, noise.<variable>. Attack keys: class, start, duration,
// intensity, shape.
// ---------------------------------------------------------------------------

inline ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig cfg;
  bool have_length = false;
  AttackSpec* attack = nullptr;
  std::array<bool, 4> attack_keys{};  // class, start, duration, intensity
  auto finish_attack = [&](std::size_t line_no) {
    if (attack && !(attack_keys[0] && attack_keys[1] && attack_keys[2] && attack_keys[3]))
      throw ParseError(line_no, "[attack] block needs class, start, duration and intensity");
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = std::string_view(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;

    if (line == "[attack]") {
      finish_attack(line_no);
      cfg.attacks.emplace_back();
      attack = &cfg.attacks.back();
      attack_keys.fill(false);
      continue;
    }
    if (line.front() == '[') throw ParseError(line_no, "unknown section " + std::string(line));

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));

    auto number = [&](auto tag) {
      using T = decltype(tag);
      const auto v = text::parse_number<T>(value);
      if (!v) throw ParseError(line_no, "invalid value for " + std::string(key));
      return *v;
    };

    if (attack) {
      if (key == "class") {
        const auto c = traffic_class_from_name(value);
        if (!c) throw ParseError(line_no, "unknown traffic class '" + std::string(value) + "'");
        attack->cls = *c;
        attack_keys[0] = true;
      } else if (key == "start") {
        attack->start = number(std::size_t{});
        attack_keys[1] = true;
      } else if (key == "duration") {
        attack->duration = number(std::size_t{});
        attack_keys[2] = true;
      } else if (key == "intensity") {
        attack->intensity = number(double{});
        attack_keys[3] = true;
      } else if (key == "shape") {
        const auto s = attack_shape_from_name(value);
        if (!s) throw ParseError(line_no, "unknown attack shape '" + std::string(value) + "'");
        attack->shape = *s;
      } else {
        throw ParseError(line_no, "unknown attack key '" + std::string(key) + "'");
      }
      continue;
    }

    if (key == "length") {
      cfg.length = number(std::size_t{});
      have_length = true;
    } else if (key == "seed") {
      cfg.baseline.seed = number(std::uint64_t{});
    } else if (key == "ar") {
      cfg.baseline.ar = number(double{});
    } else if (key == "start_timestamp") {
      cfg.baseline.start_timestamp = number(std::int64_t{});
    } else if (key == "noise") {
      cfg.baseline.noise.fill(number(double{}));
    } else if (key.starts_with("mean.") || key.starts_with("noise.")) {
      const bool is_mean = key.starts_with("mean.");
      const auto var = variable_from_name(key.substr(is_mean ? 5 : 6));
      if (!var) throw ParseError(line_no, "unknown variable in '" + std::string(key) + "'");
      (is_mean ? cfg.baseline.mean : cfg.baseline.noise)[index_of(*var)] = number(double{});
    } else {
      throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  finish_attack(line_no);
  if (!have_length) throw ParseError(line_no, "missing required key 'length'");
  try {
    cfg.baseline.validate();
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
  return cfg;
}

inline ScenarioConfig parse_scenario(std::string_view content) {
  std::istringstream in{std::string(content)};
  return parse_scenario(in);
}

inline std::string format_scenario(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "length = " << cfg.length << '\n';
  out << "seed = " << cfg.baseline.seed << '\n';
  out << "ar = " << text::format_double(cfg.baseline.ar) << '\n';
  out << "start_timestamp = " << cfg.baseline.start_timestamp << '\n';
  for (auto v : kAllVariables) {
    out << "mean." << name_of(v) << " = " << text::format_double(cfg.baseline.mean[index_of(v)]) << '\n';
    out << "noise." << name_of(v) << " = " << text::format_double(cfg.baseline.noise[index_of(v)]) << '\n';
  }
  for (const auto& a : cfg.attacks) {
    out << "\n[attack]\n";
    out << "class = " << name_of(a.cls) << '\n';
    out << "start = " << a.start << '\n';
    out << "duration = " << a.duration << '\n';
    out << "intensity = " << text::format_double(a.intensity) << '\n';
    out << "shape = " << name_of(a.shape) << '\n';
  }
  return out.str();
}

// Record counts per class from the reference SNMP-MIB DoS dataset. Brute
// force is left out: it has no flooding profile.
struct ClassCount {
  TrafficClass cls;
  std::size_t records;
};

inline constexpr std::array<ClassCount, 8> kReferenceClassCounts = {{
    {TrafficClass::Normal, 600},
    {TrafficClass::TcpSyn, 960},
    {TrafficClass::UdpFlood, 773},
    {TrafficClass::IcmpEcho, 632},
    {TrafficClass::HttpFlood, 573},
    {TrafficClass::Slowloris, 780},
    {TrafficClass::Slowpost, 480},
    {TrafficClass::BruteForce, 200},
}};

// 600 normal records (a 150-record lead, then 75 after each episode) and
// one episode per flooding class with the reference record counts.
inline ScenarioConfig paper_shape_scenario() {
  ScenarioConfig cfg;
  cfg.baseline = default_baseline();
  constexpr std::size_t lead = 150;
  constexpr std::size_t gap = 75;
  struct Episode {
    TrafficClass cls;
    double intensity;
    AttackShape shape;
  };
  const std::array<Episode, 6> episodes = {{
      {TrafficClass::TcpSyn, 8.0, AttackShape::Step},
      {TrafficClass::UdpFlood, 6.0, AttackShape::Step},
      {TrafficClass::IcmpEcho, 6.0, AttackShape::Step},
      {TrafficClass::HttpFlood, 5.0, AttackShape::Step},
      {TrafficClass::Slowloris, 5.0, AttackShape::SustainedLow},
      {TrafficClass::Slowpost, 5.0, AttackShape::SustainedLow},
  }};
  std::size_t pos = lead;
  for (const auto& e : episodes) {
    std::size_t records = 0;
    for (const auto& c : kReferenceClassCounts)
      if (c.cls == e.cls) records = c.records;
    cfg.attacks.push_back({e.cls, pos, records, e.intensity, e.shape});
    pos += records + gap;
  }
  cfg.length = pos;
  return cfg;
}

inline ScenarioConfig smoke_scenario() {
  ScenarioConfig cfg;
  cfg.length = 240;
  cfg.baseline = default_baseline();
  cfg.attacks = {
      {TrafficClass::UdpFlood, 120, 18, 6.0, AttackShape::Step},
      {TrafficClass::IcmpEcho, 190, 18, 6.0, AttackShape::Step},
  };
  return cfg;
}

inline ScenarioConfig preset_scenario(std::string_view name) {
  if (name == "paper-shape") return paper_shape_scenario();
  if (name == "smoke") return smoke_scenario();
  throw Error(ErrorKind::Config, "unknown preset '" + std::string(name) + "' (expected paper-shape or smoke)");
}

}  // namespace mibwatch
