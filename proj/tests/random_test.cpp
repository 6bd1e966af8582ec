#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "sloow/random.hpp"

using sloow::RandomStream;

TEST(RandomStream, SameSeedLabelCounterGivesSameValue) {
  RandomStream a(42, "sensor"), b(42, "sensor");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.counter(), 100u);
  EXPECT_EQ(RandomStream(42, "sensor").at(17), a.at(17));
}

TEST(RandomStream, LabelsAndSeedsSeparateStreams) {
  RandomStream a(42, "sensor"), b(42, "wind"), c(43, "sensor");
  int same_ab = 0, same_ac = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    same_ab += a.at(i) == b.at(i);
    same_ac += a.at(i) == c.at(i);
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RandomStream, DrawsUnaffectedByOtherStreams) {
  RandomStream lone(9, "sensor");
  std::vector<double> expected;
  for (int i = 0; i < 50; ++i) expected.push_back(lone.gaussian());

  RandomStream sensor(9, "sensor"), wind(9, "wind");
  for (int i = 0; i < 50; ++i) {
    wind.gaussian();
    wind.uniform();
    EXPECT_EQ(sensor.gaussian(), expected[static_cast<std::size_t>(i)]);
  }
}

TEST(RandomStream, UniformAndGaussianMoments) {
  RandomStream r(1, "moments");
  constexpr int n = 200000;
  double su = 0, sg = 0, sg2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double g = r.gaussian();
    sg += g;
    sg2 += g * g;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sg / n, 0.0, 0.01);
  EXPECT_NEAR(sg2 / n, 1.0, 0.02);
}

TEST(RandomStream, BernoulliExtremes) {
  RandomStream r(5, "channel");
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(r.bernoulli(0.0));
    EXPECT_TRUE(r.bernoulli(1.0));
  }
}
