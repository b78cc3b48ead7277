#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mibwatch/mib_model.hpp"

using namespace mibwatch;

namespace {

std::string row(std::int64_t ts, const std::string& counters, const std::string& label) {
  return std::to_string(ts) + "," + counters + "," + label + "\n";
}

const std::string kRow = "100,200,0,10,2,0,50,1,1";

Dataset delta_dataset(const std::vector<std::array<std::uint64_t, kVariableCount>>& rows) {
  std::vector<MibRecord> recs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    MibRecord r;
    r.timestamp = 1000 + static_cast<std::int64_t>(i) * 15;
    r.counters = rows[i];
    recs.push_back(r);
  }
  return Dataset(std::move(recs), CounterMode::Delta);
}

Dataset cumulative_column(Variable v, const std::vector<std::uint64_t>& values) {
  std::vector<MibRecord> recs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    MibRecord r;
    r.timestamp = 15 * static_cast<std::int64_t>(i);
    r[v] = values[i];
    recs.push_back(r);
  }
  return Dataset(std::move(recs), CounterMode::Cumulative);
}

}  // namespace

TEST(ParseDataset, SingleRow) {
  const auto d = parse_dataset(csv_header() + "\n" + row(0, kRow, "Normal"));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0][Variable::IfInOctets], 100u);
  EXPECT_EQ(d[0][Variable::TcpOutRsts], 1u);
  EXPECT_EQ(d[0].label, TrafficClass::Normal);
  EXPECT_EQ(d.mode(), CounterMode::Cumulative);
}

TEST(ParseDataset, TcpSynLabel) {
  const auto d = parse_dataset(csv_header() + "\n" + row(0, kRow, "TCP-SYN"));
  EXPECT_EQ(d[0].label, TrafficClass::TcpSyn);
}

TEST(ParseDataset, LabelSpellings) {
  EXPECT_EQ(traffic_class_from_name("udp flood"), TrafficClass::UdpFlood);
  EXPECT_EQ(traffic_class_from_name("Brute-force"), TrafficClass::BruteForce);
  EXPECT_FALSE(traffic_class_from_name("ping-of-death"));
  for (auto c : kAllTrafficClasses) EXPECT_EQ(traffic_class_from_name(name_of(c)), c);
}

TEST(ParseDataset, NegativeCounterReportsLine) {
  const std::string csv = csv_header() + "\n" + row(0, kRow, "Normal") + row(15, "100,-5,0,10,2,0,50,1,1", "Normal");
  try {
    parse_dataset(csv);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
  }
}

TEST(ParseDataset, Malformed) {
  const auto head = csv_header() + "\n";
  EXPECT_THROW(parse_dataset(head + "0,1,2,3\n"), ParseError);
  EXPECT_THROW(parse_dataset(head + row(0, "1,2,x,4,5,6,7,8,9", "Normal")), ParseError);
  EXPECT_THROW(parse_dataset(head + row(0, kRow, "Smurf")), ParseError);
  EXPECT_THROW(parse_dataset(head + row(0, kRow, "Normal") + row(20, kRow, "Normal")), ParseError);
  EXPECT_THROW(parse_dataset("time,a,b\n" + row(0, kRow, "Normal")), ParseError);
}

TEST(ParseDataset, EmptyInput) {
  for (const std::string& s : std::vector<std::string>{"", "\n\n", csv_header() + "\n"}) {
    try {
      parse_dataset(s);
      FAIL() << "expected an empty-dataset error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptyDataset);
    }
  }
}

TEST(ParseDataset, WriteRoundTrip) {
  const std::string csv = csv_header() + "\n" + row(30, kRow, "Normal") + row(45, kRow, "ICMP-ECHO");
  const auto d = parse_dataset(csv);
  EXPECT_EQ(to_csv(d), csv);
  EXPECT_EQ(parse_dataset(to_csv(d)), d);
}

TEST(CounterDeltas, PlainDifference) {
  const auto d = counter_deltas(cumulative_column(Variable::IfInOctets, {100, 160}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0][Variable::IfInOctets], 60u);
  EXPECT_EQ(d[0].timestamp, 15);
  EXPECT_EQ(d.mode(), CounterMode::Delta);
}

TEST(CounterDeltas, Wrap) {
  const std::uint64_t prev = 4294967290ull, cur = 10ull;
  const std::uint64_t oracle = cur + (std::uint64_t{1} << 32) - prev;
  const auto d = counter_deltas(cumulative_column(Variable::IfInOctets, {prev, cur}));
  EXPECT_EQ(oracle, 16u);
  EXPECT_EQ(d[0][Variable::IfInOctets], oracle);
}

TEST(CounterDeltas, SingleRecord) {
  try {
    counter_deltas(cumulative_column(Variable::IfInOctets, {5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
  }
}

TEST(CounterDeltas, LabelFromLaterPoll) {
  auto d = parse_dataset(csv_header() + "\n" + row(0, kRow, "Normal") + row(15, kRow, "HTTP-flood"));
  const auto deltas = counter_deltas(d);
  EXPECT_EQ(deltas[0].label, TrafficClass::HttpFlood);
}

TEST(CounterDeltas, AccumulateInvertsModulo32Bits) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> counter(0, kCounterModulus - 1);
  std::uniform_int_distribution<std::size_t> len(2, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = len(rng);
    std::vector<MibRecord> recs(n);
    for (std::size_t i = 0; i < n; ++i) {
      recs[i].timestamp = 900 + 15 * static_cast<std::int64_t>(i);
      for (auto& c : recs[i].counters) c = counter(rng);
    }
    const Dataset cum(recs, CounterMode::Cumulative);
    const auto deltas = counter_deltas(cum);
    for (std::size_t i = 0; i < deltas.size(); ++i)
      for (std::size_t v = 0; v < kVariableCount; ++v)
        ASSERT_EQ((recs[i].counters[v] + deltas[i].counters[v]) % kCounterModulus, recs[i + 1].counters[v]);
    EXPECT_EQ(accumulate_counters(deltas, recs[0]), cum);
  }
}

TEST(Dataset, RejectsOffGridAndOversizedDeltas) {
  std::vector<MibRecord> recs(2);
  recs[1].timestamp = 16;
  EXPECT_THROW(Dataset(recs, CounterMode::Cumulative), Error);
  recs[1].timestamp = 15;
  recs[1].counters[0] = kCounterModulus;
  EXPECT_THROW(Dataset(recs, CounterMode::Delta), Error);
  EXPECT_THROW(Dataset({}, CounterMode::Delta), Error);
}

TEST(Summarize, TwoValues) {
  const auto s = summarize(delta_dataset({{2, 7, 0, 0, 0, 0, 0, 0, 1}, {4, 7, 0, 0, 0, 0, 0, 0, 4}}));
  EXPECT_DOUBLE_EQ(s[Variable::IfInOctets].min, 2.0);
  EXPECT_DOUBLE_EQ(s[Variable::IfInOctets].max, 4.0);
  EXPECT_NEAR(s[Variable::IfInOctets].std, std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(s[Variable::IfOutOctets].std, 0.0);
  EXPECT_DOUBLE_EQ(s[Variable::TcpOutRsts].min, 1.0);
  EXPECT_DOUBLE_EQ(s[Variable::TcpOutRsts].max, 4.0);
}

TEST(Summarize, Constant) {
  const auto s = summarize(delta_dataset({{7}, {7}, {7}}));
  EXPECT_DOUBLE_EQ(s[Variable::IfInOctets].min, 7.0);
  EXPECT_DOUBLE_EQ(s[Variable::IfInOctets].max, 7.0);
  EXPECT_DOUBLE_EQ(s[Variable::IfInOctets].std, 0.0);
}

TEST(Summarize, SingleRecord) {
  EXPECT_THROW(summarize(delta_dataset({{1}})), Error);
}

TEST(Summarize, MatchesTwoPassOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> base(0, kCounterModulus - 1000);
  std::uniform_int_distribution<std::uint64_t> jitter(0, 999);
  for (int trial = 0; trial < 100; ++trial) {
    const auto offset = base(rng);
    std::vector<std::array<std::uint64_t, kVariableCount>> rows(2 + trial % 30);
    for (auto& r : rows)
      for (auto& c : r) c = offset + jitter(rng);
    const auto s = summarize(delta_dataset(rows));
    for (std::size_t v = 0; v < kVariableCount; ++v) {
      // Two-pass on offset-removed values in long double.
      long double mean = 0;
      for (auto& r : rows) mean += static_cast<long double>(r[v] - offset);
      mean /= rows.size();
      long double ss = 0;
      for (auto& r : rows) ss += (static_cast<long double>(r[v] - offset) - mean) * (static_cast<long double>(r[v] - offset) - mean);
      const double oracle = static_cast<double>(std::sqrt(ss / (rows.size() - 1)));
      ASSERT_NEAR(s.stats[v].std, oracle, 1e-9 * std::max(1.0, oracle));
    }
  }
}

TEST(Scaler, Midpoint) {
  const auto d = delta_dataset({{0}, {10}});
  const auto s = fit_scaler(d);
  EXPECT_DOUBLE_EQ(s.scale(Variable::IfInOctets, 5.0), 0.5);
  EXPECT_DOUBLE_EQ(s.scale(Variable::IfInOctets, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(s.scale(Variable::IfInOctets, 10.0), 1.0);
}

TEST(Scaler, ConstantVariable) {
  const auto d = delta_dataset({{3}, {3}, {3}});
  const auto s = fit_scaler(d);
  const auto t = apply_scaler(s, d);
  for (double x : t[Variable::IfInOctets]) EXPECT_EQ(x, 0.0);
  const auto back = invert_scaler(s, t);
  for (double x : back[Variable::IfInOctets]) EXPECT_EQ(x, 3.0);
}

TEST(Scaler, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> c(0, 5'000'000);
  std::vector<std::array<std::uint64_t, kVariableCount>> rows(50);
  for (auto& r : rows)
    for (auto& x : r) x = c(rng);
  const auto d = delta_dataset(rows);
  const auto s = fit_scaler(d);
  const auto back = invert_scaler(s, apply_scaler(s, d));
  for (auto v : kAllVariables) {
    const auto orig = d.column(v);
    for (std::size_t i = 0; i < orig.size(); ++i)
      ASSERT_NEAR(back[v][i], orig[i], 1e-9 * std::max(1.0, std::abs(orig[i])));
  }
}

TEST(Scaler, UnseenVariable) {
  const auto d = delta_dataset({{0}, {10}});
  const std::array<Variable, 1> only{Variable::IfInOctets};
  const auto s = fit_scaler(d, only);
  try {
    apply_scaler(s, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Schema);
  }
  EXPECT_THROW(s.scale(Variable::TcpOutRsts, 1.0), Error);
}

TEST(Scaler, RequiresDeltas) {
  EXPECT_THROW(fit_scaler(cumulative_column(Variable::IfInOctets, {1, 2})), Error);
}
