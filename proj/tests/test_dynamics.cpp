#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "platoon/dynamics.hpp"

using namespace platoon;

namespace {

VehicleState at(int id, double s, int lane, double v = 20.0) {
  VehicleState st;
  st.id = VehicleId{id};
  st.s = s;
  st.lane = lane;
  st.v = v;
  return st;
}

}  // namespace

TEST(Longitudinal, FullBrakeOneStep) {
  const auto next = step_longitudinal(at(1, 0, 1, 20.0), -9.81, DynamicsLimits{}, 0.1);
  EXPECT_NEAR(next.v, 19.019, 1e-12);
}

TEST(Longitudinal, FloorsAtStandstill) {
  const auto next = step_longitudinal(at(1, 0, 1, 0.05), -9.81, DynamicsLimits{}, 0.1);
  EXPECT_EQ(next.v, 0.0);
}

TEST(Longitudinal, CommandClampedToLimits) {
  const DynamicsLimits lim;
  EXPECT_DOUBLE_EQ(step_longitudinal(at(1, 0, 1, 10.0), 50.0, lim, 0.05).a, lim.a_max);
  EXPECT_DOUBLE_EQ(step_longitudinal(at(1, 0, 1, 10.0), -50.0, lim, 0.05).a, -lim.d_max);
}

TEST(Longitudinal, JerkLimit) {
  DynamicsLimits lim;
  lim.jerk_max = 10.0;
  const auto next = step_longitudinal(at(1, 0, 1, 10.0), -9.81, lim, 0.05);
  EXPECT_DOUBLE_EQ(next.a, -0.5);
}

TEST(Longitudinal, StoppingDistanceOracle) {
  // Closed form: v0^2 / (2 d) over v0 / d seconds.
  const DynamicsLimits lim;
  const double dt = 0.05;
  VehicleState st = at(1, 0, 1, 20.0);
  int ticks = 0;
  while (st.v > 0.0) {
    st = step_longitudinal(st, -lim.d_max, lim, dt);
    ++ticks;
  }
  EXPECT_NEAR(st.s, 20.0 * 20.0 / (2.0 * 9.81), dt * 20.0);
  EXPECT_NEAR(st.s, 20.39, 0.01);
  EXPECT_LE(ticks * dt, 20.0 / 9.81 + dt);
}

TEST(LongitudinalProperty, BrakingMatchesKinematicsFromAnySpeed) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> speed(0.0, 40.0);
  std::uniform_real_distribution<double> step(0.01, 0.2);
  const DynamicsLimits lim;
  for (int i = 0; i < 500; ++i) {
    const double v0 = speed(rng);
    const double dt = step(rng);
    VehicleState st = at(1, 0, 1, v0);
    for (int k = 0; k < 10000 && st.v > 0.0; ++k) st = step_longitudinal(st, -lim.d_max, lim, dt);
    EXPECT_NEAR(st.s, v0 * v0 / (2.0 * lim.d_max), dt * v0) << "v0=" << v0 << " dt=" << dt;
  }
}

TEST(LongitudinalProperty, SpeedNeverNegativeAndAccelBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cmd(-30.0, 30.0);
  std::uniform_real_distribution<double> speed(0.0, 30.0);
  const DynamicsLimits lim;
  const double bound = std::max(lim.a_max, lim.d_max);
  for (int run = 0; run < 200; ++run) {
    VehicleState st = at(1, 0, 1, speed(rng));
    for (int k = 0; k < 200; ++k) {
      const VehicleState next = step_longitudinal(st, cmd(rng), lim, 0.05);
      ASSERT_GE(next.v, 0.0);
      ASSERT_LE(std::abs(next.a), bound);
      ASSERT_GE(next.s, st.s);
      st = next;
    }
  }
}

TEST(LongitudinalProperty, OrderIndependence) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cmd(-10.0, 3.0);
  std::vector<VehicleState> fleet;
  for (int i = 0; i < 6; ++i) fleet.push_back(at(i + 1, 100.0 - 15.0 * i, i % 3, 15.0 + i));
  const DynamicsLimits lim;
  const LaneGeometry geom;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> a(fleet.size());
    std::vector<Lateral> lat(fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      a[i] = cmd(rng);
      lat[i] = fleet[i].lane == 0 ? Lateral::change_to(1) : Lateral::center();
    }
    std::vector<std::size_t> order(fleet.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<VehicleState> forward(fleet.size());
    for (std::size_t i : order) forward[i] = step_longitudinal(step_lateral(fleet[i], lat[i], geom, 0.05), a[i], lim, 0.05);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<VehicleState> shuffled(fleet.size());
    for (std::size_t i : order) shuffled[i] = step_longitudinal(step_lateral(fleet[i], lat[i], geom, 0.05), a[i], lim, 0.05);

    for (std::size_t i = 0; i < fleet.size(); ++i) {
      ASSERT_EQ(forward[i].s, shuffled[i].s);
      ASSERT_EQ(forward[i].v, shuffled[i].v);
      ASSERT_EQ(forward[i].lateral_offset, shuffled[i].lateral_offset);
    }
    fleet = forward;
  }
}

TEST(Lateral, HalfwayAfterHalfTheDuration) {
  const LaneGeometry geom;
  VehicleState st = at(1, 0, 1);
  for (int k = 0; k < 30; ++k) st = step_lateral(st, Lateral::change_to(2), geom, 0.05);
  EXPECT_EQ(st.lane, 1);
  EXPECT_NEAR(st.lateral_offset, 0.5 * geom.lane_width, 1e-9);
  for (int k = 0; k < 30; ++k) st = step_lateral(st, Lateral::change_to(2), geom, 0.05);
  EXPECT_EQ(st.lane, 2);
  EXPECT_EQ(st.lateral_offset, 0.0);
}

TEST(Lateral, CenteredStaysCentered) {
  const auto st = step_lateral(at(1, 0, 1), Lateral::center(), LaneGeometry{}, 0.05);
  EXPECT_EQ(st.lateral_offset, 0.0);
}

TEST(Lateral, NonAdjacentTargetThrows) {
  EXPECT_THROW(step_lateral(at(1, 0, 0), Lateral::change_to(2), LaneGeometry{}, 0.05), InvalidLane);
  EXPECT_THROW(step_lateral(at(1, 0, 2), Lateral::change_to(3), LaneGeometry{}, 0.05), InvalidLane);
}

TEST(Collisions, PositiveGapIsFine) {
  std::vector<VehicleState> v = {at(1, 10.5, 1), at(2, 5.0, 1)};
  EXPECT_TRUE(detect_collisions(v, LaneGeometry{}, 1.8).empty());
}

TEST(Collisions, OverlapInSameLane) {
  std::vector<VehicleState> v = {at(1, 9.9, 1), at(2, 5.0, 1)};
  const auto hits = detect_collisions(v, LaneGeometry{}, 1.8);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].first, VehicleId{1});
  EXPECT_EQ(hits[0].second, VehicleId{2});
}

TEST(Collisions, AdjacentLanesDoNotCollide) {
  std::vector<VehicleState> v = {at(1, 9.9, 1), at(2, 5.0, 2)};
  EXPECT_TRUE(detect_collisions(v, LaneGeometry{}, 1.8).empty());
}
