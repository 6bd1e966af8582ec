#include <gtest/gtest.h>

#include <cmath>

#include "sloow/actuator.hpp"

using namespace sloow;

namespace {

CurtainState at(int opening) { return {opening, opening, 2.0, 0.0}; }

}  // namespace

TEST(ApplyCommand, SetRampsAtTwoPercentPerSecond) {
  RandomStream rng(1, "channel");
  auto r = apply_command(at(70), SetOpening{66}, CommandChannel{}, rng);
  EXPECT_FALSE(r.dropped);
  EXPECT_EQ(r.state.target_pct, 66);
  EXPECT_EQ(r.state.opening_pct, 70);
  auto s = advance(r.state, 1.0);
  EXPECT_EQ(s.opening_pct, 68);
  s = advance(s, 1.0);
  EXPECT_EQ(s.opening_pct, 66);
  EXPECT_EQ(advance(s, 1.0), s);
}

TEST(ApplyCommand, HoldIsANoOp) {
  RandomStream rng(1, "channel");
  auto r = apply_command(at(70), Hold{}, CommandChannel{}, rng);
  EXPECT_EQ(r.state, at(70));
  EXPECT_FALSE(r.dropped);
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(ApplyCommand, CertainLossLeavesStateAndReportsDrop) {
  RandomStream rng(1, "channel");
  auto r = apply_command(at(70), SetOpening{66}, CommandChannel{1.0, 1.0}, rng);
  EXPECT_TRUE(r.dropped);
  EXPECT_EQ(r.state, at(70));
}

TEST(ApplyCommand, OutOfRangeTargetIsADeviceError) {
  RandomStream rng(1, "channel");
  EXPECT_THROW(apply_command(at(70), SetOpening{101}, CommandChannel{}, rng), DeviceError);
  EXPECT_THROW(apply_command(at(70), SetOpening{-1}, CommandChannel{}, rng), DeviceError);
}

TEST(Curtain, FuzzedCommandsStayInRangeAndSettleOnLastTarget) {
  RandomStream rng(2, "fuzz"), channel_rng(2, "channel");
  CurtainState s = at(70);
  s.ramp_rate = 1.0 + rng.uniform() * 5;
  int last = 70;
  for (int i = 0; i < 20000; ++i) {
    const int target = static_cast<int>(rng.next_u64() % 101);
    s = apply_command(s, SetOpening{target}, CommandChannel{0.0, 0.0}, channel_rng).state;
    last = target;
    const int steps = static_cast<int>(rng.next_u64() % 10);
    for (int k = 0; k < steps; ++k) {
      s = advance(s, 0.5 + rng.uniform());
      ASSERT_GE(s.opening_pct, 0);
      ASSERT_LE(s.opening_pct, 100);
    }
  }
  for (int k = 0; k < 200; ++k) s = advance(s, 1.0);
  EXPECT_EQ(s.opening_pct, last);
}

TEST(Curtain, RampGapShrinksStrictlyEverySecond) {
  for (double rate : {1.0, 1.5, 2.0, 7.0}) {
    CurtainState s{0, 100, rate, 0.0};
    int gap = 100;
    while (gap > 0) {
      s = advance(s, 1.0);
      const int g = std::abs(s.target_pct - s.opening_pct);
      ASSERT_LT(g, gap) << rate;
      gap = g;
    }
  }
}

TEST(Curtain, FractionalRampAccumulates) {
  CurtainState s{70, 66, 0.5, 0.0};
  s = advance(s, 1.0);
  EXPECT_EQ(s.opening_pct, 70);
  s = advance(s, 1.0);
  EXPECT_EQ(s.opening_pct, 69);
}

TEST(LightFraction, Examples) {
  const LightModel m;
  EXPECT_DOUBLE_EQ(light_fraction(100, 43200, m), 1.0);
  for (int o : {0, 50, 100}) EXPECT_EQ(light_fraction(o, 0, m), 0.0);
  EXPECT_DOUBLE_EQ(light_fraction(0, 43200, m), 0.1);
  EXPECT_EQ(light_fraction(90, 64800, m), 0.0);
  EXPECT_EQ(light_fraction(90, 21600, m), 0.0);
  EXPECT_DOUBLE_EQ(light_fraction(100, 43200 + 86400, m), 1.0);
  EXPECT_THROW(light_fraction(101, 43200, m), InputError);
}

TEST(LightFraction, MonotoneInOpeningAcrossTheDay) {
  const LightModel m;
  for (double t = 0; t < 86400; t += 60) {
    double prev = -1;
    for (int o = 0; o <= 100; ++o) {
      const double l = light_fraction(o, t, m);
      ASSERT_GE(l, 0.0);
      ASSERT_LE(l, 1.0);
      if (diurnal_factor(t, m) > 0)
        ASSERT_GT(l, prev) << t << " " << o;
      else
        ASSERT_EQ(l, 0.0);
      prev = l;
    }
  }
}

TEST(CurtainSway, Examples) {
  EXPECT_EQ(curtain_sway(0), 0.0);
  EXPECT_DOUBLE_EQ(curtain_sway(450), 1.0);
  EXPECT_NEAR(curtain_sway(1800), 0.0, 1e-9);
  EXPECT_NEAR(curtain_sway(123.4), curtain_sway(123.4 + 1800 * 7), 1e-12);
}

TEST(Validate, ChannelAndLight) {
  EXPECT_THROW(validate(CommandChannel{1.5, 1.0}), ConfigError);
  EXPECT_THROW(validate(CommandChannel{0.0, -1.0}), ConfigError);
  EXPECT_THROW(validate(LightModel{0.5, 0.4, 21600, 64800}), ConfigError);
  EXPECT_THROW(validate(LightModel{0.1, 1.0, 64800, 21600}), ConfigError);
}
