#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mibwatch/change_detect.hpp"

using namespace mibwatch;

namespace {

std::vector<std::size_t> alarm_indices(const std::vector<AlarmEvent>& alarms) {
  std::vector<std::size_t> out;
  for (const auto& a : alarms) out.push_back(a.sample_index);
  return out;
}

std::vector<std::size_t> brute_force(const ControlLimits& lim, const std::vector<double>& w) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] < lim.lcl || w[i] > lim.ucl) out.push_back(i);
  return out;
}

std::vector<TimedValue> timed(const std::vector<double>& v) {
  std::vector<TimedValue> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({15 * static_cast<std::int64_t>(i), v[i]});
  return out;
}

}  // namespace

TEST(ControlLimits, ConstantWindow) {
  const std::vector<double> w(9, 5.0);
  const auto lim = control_limits(w, 3.0, 0.0);
  EXPECT_EQ(lim.sigma, 0.0);
  EXPECT_EQ(lim.cl, 5.0);
  EXPECT_EQ(lim.ucl, 5.0);
  EXPECT_EQ(lim.lcl, 5.0);
  EXPECT_TRUE(detect_window(lim, w).empty());
}

TEST(ControlLimits, Ramp) {
  const std::vector<double> w{2, 4, 6, 8, 10, 12, 14, 16, 18};
  const auto lim = control_limits(w, 3.0);
  EXPECT_DOUBLE_EQ(lim.cl, 10.0);
  EXPECT_NEAR(lim.sigma, std::sqrt(30.0), 1e-12);
  EXPECT_NEAR(lim.ucl, 26.431, 1e-3);
  EXPECT_NEAR(lim.lcl, -6.431, 1e-3);
}

TEST(ControlLimits, TwoSamples) {
  const std::vector<double> w{1, 3};
  const auto lim = control_limits(w, 1.0);
  EXPECT_DOUBLE_EQ(lim.cl, 2.0);
  EXPECT_NEAR(lim.sigma, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(lim.ucl, 2.0 + std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(lim.lcl, 2.0 - std::sqrt(2.0), 1e-15);
}

TEST(ControlLimits, FloorAndErrors) {
  const std::vector<double> w(4, 1.0);
  const auto lim = control_limits(w, 2.0, 0.5);
  EXPECT_EQ(lim.sigma, 0.5);
  EXPECT_EQ(lim.ucl, 2.0);
  EXPECT_EQ(lim.lcl, 0.0);
  try {
    control_limits(std::vector<double>{1.0}, 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
  }
  EXPECT_THROW(control_limits(w, 0.0), Error);
  EXPECT_THROW(control_limits(w, 3.0, -1.0), Error);
}

TEST(DetectWindow, Examples) {
  ControlLimits lim;
  lim.cl = 10.0;
  lim.lcl = -6.431;
  lim.ucl = 26.431;
  const std::vector<double> w{10, 10, 10, 10, 30, 10, 10, 10, 10};
  const auto alarms = detect_window(lim, w);
  ASSERT_EQ(alarms.size(), 1u);
  EXPECT_EQ(alarms[0].sample_index, 4u);
  EXPECT_EQ(alarms[0].violated, Violation::Upper);

  EXPECT_TRUE(detect_window(lim, std::vector<double>(9, 10.0)).empty());
  EXPECT_TRUE(detect_window(lim, std::vector<double>{26.431, -6.431}).empty());
  const auto low = detect_window(lim, std::vector<double>{std::nextafter(-6.431, -10.0)});
  ASSERT_EQ(low.size(), 1u);
  EXPECT_EQ(low[0].violated, Violation::Lower);
}

TEST(DetectWindow, MatchesBruteForce) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> k(0.1, 4.0);
  std::uniform_int_distribution<std::size_t> len(2, 30);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> learn(len(rng)), test(len(rng));
    for (auto& x : learn) x = g(rng);
    for (auto& x : test) x = 2.0 * g(rng);
    const auto lim = control_limits(learn, k(rng));
    ASSERT_EQ(alarm_indices(detect_window(lim, test)), brute_force(lim, test));
  }
}

TEST(ControlLimits, Symmetric) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> w(9);
    for (auto& x : w) x = u(rng);
    const auto lim = control_limits(w, 3.0);
    // Equal up to the rounding of the two additions.
    ASSERT_NEAR(lim.ucl - lim.cl, lim.cl - lim.lcl, 1e-15 * (std::abs(lim.cl) + lim.ucl - lim.lcl));
  }
}

TEST(DetectWindow, MonotoneInK) {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> k(0.1, 4.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> learn(9), test(9);
    for (auto& x : learn) x = g(rng);
    for (auto& x : test) x = 2.0 * g(rng);
    double k1 = k(rng), k2 = k(rng);
    if (k1 > k2) std::swap(k1, k2);
    const auto wide = alarm_indices(detect_window(control_limits(learn, k2), test));
    const auto narrow = alarm_indices(detect_window(control_limits(learn, k1), test));
    ASSERT_TRUE(std::includes(narrow.begin(), narrow.end(), wide.begin(), wide.end()));
  }
}

TEST(DetectWindow, Equivariance) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> learn(9), test(9);
    for (auto& x : learn) x = g(rng);
    for (auto& x : test) x = 2.5 * g(rng);
    const auto lim = control_limits(learn, 3.0);
    const auto base = alarm_indices(detect_window(lim, test));

    // Shift and scale by powers of two keep the arithmetic exact.
    const double c = 64.0, s = 8.0;
    auto shift = [&](std::vector<double> v) { for (auto& x : v) x += c; return v; };
    auto scale = [&](std::vector<double> v) { for (auto& x : v) x *= s; return v; };
    const auto ls = control_limits(shift(learn), 3.0);
    ASSERT_NEAR(ls.cl, lim.cl + c, 1e-12);
    ASSERT_NEAR(ls.ucl, lim.ucl + c, 1e-12);
    ASSERT_NEAR(ls.lcl, lim.lcl + c, 1e-12);
    const auto lk = control_limits(scale(learn), 3.0);
    ASSERT_NEAR(lk.sigma, s * lim.sigma, 1e-12);
    ASSERT_NEAR(lk.ucl, s * lim.ucl, 1e-12);
    ASSERT_NEAR(lk.lcl, s * lim.lcl, 1e-12);
    ASSERT_EQ(alarm_indices(detect_window(lk, scale(test))), base);

    // A shifted chart agrees with the original everywhere except within
    // rounding distance of a limit.
    const auto shifted = alarm_indices(detect_window(ls, shift(test)));
    bool near_limit = false;
    for (double x : test) near_limit = near_limit || std::abs(x - lim.ucl) < 1e-9 || std::abs(x - lim.lcl) < 1e-9;
    if (!near_limit) ASSERT_EQ(shifted, base);
  }
}

TEST(StreamDetect, ConstantStream) {
  const auto r = stream_detect(timed(std::vector<double>(18, 3.0)), WindowConfig{});
  EXPECT_TRUE(r.alarms.empty());
  EXPECT_EQ(r.flags(), std::vector<WindowFlag>{WindowFlag::Clear});
}

TEST(StreamDetect, SingleSpike) {
  std::vector<double> v{0.1, -0.1, 0.2, -0.2, 0.0, 0.1, -0.1, 0.2, -0.2};
  const double sigma = control_limits(v, 3.0).sigma;
  auto test = v;
  test[5] += 10.0 * sigma;
  v.insert(v.end(), test.begin(), test.end());
  const auto r = stream_detect(timed(v), WindowConfig{});
  ASSERT_EQ(r.alarms.size(), 1u);
  EXPECT_EQ(r.alarms[0].sample_index, 14u);
  EXPECT_EQ(r.alarms[0].timestamp, 14 * 15);
  EXPECT_EQ(r.alarms[0].window_index, 1u);
  EXPECT_EQ(r.flags(), std::vector<WindowFlag>{WindowFlag::Flagged});
  EXPECT_EQ(r.windows[0].start_timestamp, 9 * 15);
  EXPECT_EQ(r.windows[0].end_timestamp, 17 * 15);
}

TEST(StreamDetect, BaselinePolicies) {
  // Window 1 is a level shift; window 2 repeats it.
  std::vector<double> v{0.1, -0.1, 0.2, -0.2, 0.0, 0.1, -0.1, 0.2, -0.2};
  for (int rep = 0; rep < 2; ++rep)
    for (int i = 0; i < 9; ++i) v.push_back(v[static_cast<std::size_t>(i)] + 5.0);
  WindowConfig cfg;
  const auto clean = stream_detect(timed(v), cfg);
  EXPECT_EQ(clean.flags(), (std::vector<WindowFlag>{WindowFlag::Flagged, WindowFlag::Flagged}));
  EXPECT_EQ(clean.windows[1].limits.cl, clean.windows[0].limits.cl);

  cfg.baseline_update = BaselineUpdate::Always;
  const auto always = stream_detect(timed(v), cfg);
  EXPECT_EQ(always.flags(), (std::vector<WindowFlag>{WindowFlag::Flagged, WindowFlag::Clear}));
}

TEST(StreamDetect, DropsPartialWindowAndRejectsShortInput) {
  const auto r = stream_detect(timed(std::vector<double>(26, 1.0)), WindowConfig{});
  EXPECT_EQ(r.windows.size(), 1u);
  try {
    stream_detect(timed(std::vector<double>(17, 1.0)), WindowConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
  }
}

TEST(StreamDetect, MatchesWindowComposition) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution spike(0.05);
  for (auto policy : {BaselineUpdate::Always, BaselineUpdate::CleanOnly}) {
    std::vector<double> v(9 * 40);
    for (auto& x : v) x = g(rng) + (spike(rng) ? 8.0 : 0.0);
    WindowConfig cfg;
    cfg.baseline_update = policy;
    const auto r = stream_detect(timed(v), cfg);

    std::vector<std::size_t> expected;
    auto lim = control_limits(std::span(v).subspan(0, 9), 3.0, cfg.sigma_floor);
    for (std::size_t w = 1; w < 40; ++w) {
      const auto win = std::span(v).subspan(9 * w, 9);
      const auto hits = detect_window(lim, win, w, 9 * w);
      for (const auto& a : hits) expected.push_back(a.sample_index);
      ASSERT_EQ(r.windows[w - 1].flag, hits.empty() ? WindowFlag::Clear : WindowFlag::Flagged);
      if (policy == BaselineUpdate::Always || hits.empty()) lim = control_limits(win, 3.0, cfg.sigma_floor);
    }
    ASSERT_EQ(alarm_indices(r.alarms), expected);
  }
}

TEST(BaselineUpdate, Names) {
  EXPECT_EQ(baseline_update_from_name("always"), BaselineUpdate::Always);
  EXPECT_EQ(baseline_update_from_name("clean-only"), BaselineUpdate::CleanOnly);
  EXPECT_FALSE(baseline_update_from_name("never"));
  EXPECT_EQ(name_of(BaselineUpdate::CleanOnly), "clean-only");
}
