#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "platoon/comms.hpp"
#include "platoon/controllers.hpp"
#include "platoon/dynamics.hpp"

using namespace platoon;

namespace {

RadarReading reading(double gap, double rel = 0.0, int target = 1) {
  RadarReading r;
  r.valid = true;
  r.gap = gap;
  r.rel_speed = rel;
  r.target = VehicleId{target};
  return r;
}

PeerView peer(double v, double a = 0.0, Tick age = 1) {
  PeerView p;
  p.id = VehicleId{1};
  p.age = age;
  p.state.id = p.id;
  p.state.v = v;
  p.state.a = a;
  return p;
}

double acc_once(double gap, double v, double rel = 0.0) {
  PidState pid;
  return acc(reading(gap, rel), v, SpacingPolicy{}, GainSet{}, 0.05, pid).a_cmd;
}

double cacc_once(double gap, double v, const PeerView& p) {
  PidState pid;
  return cacc(reading(gap, p.state.v - v), &p, v, SpacingPolicy{}, GainSet{}, 0.05, 10, pid).a_cmd;
}

}  // namespace

TEST(Cruise, ZeroAtSetpoint) { EXPECT_EQ(cc(20.0, 20.0, GainSet{}), 0.0); }

TEST(Cruise, SlowsDownAboveSetpoint) { EXPECT_LT(cc(20.0, 18.0, GainSet{}), 0.0); }

TEST(Acc, ZeroAtEnlargedHeadway) { EXPECT_NEAR(acc_once(3.0 + 0.75 * 20.0, 20.0), 0.0, 1e-12); }

TEST(Acc, PlatoonGapTooSmall) { EXPECT_LT(acc_once(13.0, 20.0), 0.0); }

TEST(Acc, LargeGapAccelerates) { EXPECT_GT(acc_once(30.0, 20.0), 0.0); }

TEST(Acc, FailedRadarFlagged) {
  PidState pid;
  RadarReading r = reading(200.0);
  r.valid = false;
  EXPECT_EQ(acc(r, 20.0, SpacingPolicy{}, GainSet{}, 0.05, pid).status, ControlStatus::InvalidReading);
}

TEST(Cacc, SteadyStateThirteenMetres) { EXPECT_NEAR(cacc_once(13.0, 20.0, peer(20.0)), 0.0, 1e-12); }

TEST(Cacc, StandstillThreeMetres) { EXPECT_NEAR(cacc_once(3.0, 0.0, peer(0.0)), 0.0, 1e-12); }

TEST(Cacc, ZeroedPeerBrakesHard) {
  PeerView p = peer(0.0);
  p.substituted = true;
  PidState pid;
  const double a = cacc(reading(13.0, 0.0), &p, 20.0, SpacingPolicy{}, GainSet{}, 0.05, 10, pid).a_cmd;
  EXPECT_LT(a, -DynamicsLimits{}.d_max);
}

TEST(Cacc, StaleOrMissingPeer) {
  PidState pid;
  EXPECT_EQ(cacc(reading(13.0), nullptr, 20.0, SpacingPolicy{}, GainSet{}, 0.05, 10, pid).status,
            ControlStatus::StaleData);
  const PeerView old = peer(20.0, 0.0, 11);
  EXPECT_EQ(cacc(reading(13.0), &old, 20.0, SpacingPolicy{}, GainSet{}, 0.05, 10, pid).status,
            ControlStatus::StaleData);
}

TEST(Headway, ClampedToPolicyBounds) {
  const SpacingPolicy p;
  EXPECT_DOUBLE_EQ(variable_headway(0.0, p), 0.5);
  EXPECT_DOUBLE_EQ(variable_headway(100.0, p), p.h_min);
  EXPECT_DOUBLE_EQ(variable_headway(-100.0, p), p.h_max);
}

TEST(Aeb, FullBrakeWhileMoving) {
  EXPECT_DOUBLE_EQ(aeb(20.0, DynamicsLimits{}), -9.81);
  EXPECT_EQ(aeb(0.0, DynamicsLimits{}), 0.0);
}

TEST(Ttc, BoundaryTriggersAeb) {
  RadarReading r = reading(40.0, -20.0);
  r.new_target = true;
  EXPECT_EQ(ttc_trigger(r, TtcConfig{}), TtcOutcome::AebTrigger);
}

TEST(Ttc, SlowClosingIsCutIn) {
  RadarReading r = reading(25.0, -2.0);
  r.new_target = true;
  EXPECT_EQ(ttc_trigger(r, TtcConfig{}), TtcOutcome::CutIn);
}

TEST(Ttc, VeryShortGapTriggersAeb) {
  RadarReading r = reading(4.0, 1.0);
  r.new_target = true;
  EXPECT_EQ(ttc_trigger(r, TtcConfig{}), TtcOutcome::AebTrigger);
}

TEST(Ttc, KnownTargetIgnored) {
  for (double gap : {1.0, 10.0, 100.0}) EXPECT_EQ(ttc_trigger(reading(gap, -30.0), TtcConfig{}), TtcOutcome::None);
}

TEST(ControlLayer, AebDominates) {
  ControlLayer layer;
  VehicleState ego;
  ego.v = 15.0;
  const RadarReading r = reading(50.0);
  const ControlInputs in{&ego, &r, &r, nullptr};
  const auto out = layer.evaluate(ControllerCommand::make(Longitudinal::AEB), in, Parameters{});
  EXPECT_EQ(out.a_cmd, -Parameters{}.limits.d_max);
}

TEST(ControlLayer, AccCapLimitsSpeed) {
  ControlLayer layer;
  VehicleState ego;
  ego.v = 25.0;
  const RadarReading r = reading(200.0);
  const ControlInputs in{&ego, &r, &r, nullptr};
  EXPECT_LT(layer.evaluate(ControllerCommand::make(Longitudinal::ACC, 20.0), in, Parameters{}).a_cmd, 0.0);
}

TEST(ControllerProperty, MonotoneInGap) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> gap(0.0, 100.0);
  std::uniform_real_distribution<double> speed(0.0, 30.0);
  std::uniform_real_distribution<double> rel(-10.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = speed(rng);
    const double r = rel(rng);
    double g1 = gap(rng);
    double g2 = gap(rng);
    if (g1 > g2) std::swap(g1, g2);
    EXPECT_LE(acc_once(g1, v, r), acc_once(g2, v, r));
    const PeerView p = peer(std::max(0.0, v + r));
    EXPECT_LE(cacc_once(g1, v, p), cacc_once(g2, v, p));
  }
}

TEST(ControllerProperty, AntiWindupHoldsUnderAnyErrorSequence) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> err(-500.0, 500.0);
  GainSet g;
  for (int run = 0; run < 100; ++run) {
    PidState pid;
    for (int k = 0; k < 2000; ++k) {
      pid.step(run % 2 ? err(rng) : 300.0, g, 0.05);
      ASSERT_LE(std::abs(g.ki * pid.integral), g.windup_clamp + 1e-12);
    }
  }
}

TEST(ControllerProperty, CaccEquilibriumAcrossSpeeds) {
  const SpacingPolicy p;
  for (double v = 0.0; v <= 35.0; v += 0.5) {
    EXPECT_NEAR(cacc_once(p.desired_gap(v, p.h_base), v, peer(v)), 0.0, 1e-12) << v;
  }
}

namespace {

// Five vehicles: leader on CC, four CACC followers fed by radar truth and a
// one-tick-old V2V view of their predecessor. Returns per-vehicle maximum
// speed deviation beyond the new setpoint.
std::vector<double> overshoot_after_step(double v0, double v1) {
  const Parameters params;
  const double dt = params.dt;
  std::vector<VehicleState> st(5);
  for (int i = 0; i < 5; ++i) {
    st[i].id = VehicleId{i + 1};
    st[i].lane = 1;
    st[i].v = v0;
    st[i].s = 100.0 - i * (params.spacing.desired_gap(v0, params.spacing.h_base) + st[i].length);
  }
  std::vector<VehicleState> prev = st;
  std::vector<PidState> pid(5);
  std::vector<double> worst(5, 0.0);
  const double sign = v1 > v0 ? 1.0 : -1.0;
  for (int k = 0; k < 1200; ++k) {
    std::vector<double> a(5);
    a[0] = cc(st[0].v, v1, params.gains);
    for (int i = 1; i < 5; ++i) {
      RadarReading r = perceive_ahead(st[i], st, params.lanes, params.vehicle.width, params.radar.max_range);
      PeerView pv;
      pv.id = st[i - 1].id;
      pv.age = 1;
      pv.state = prev[i - 1];
      a[i] = cacc(r, &pv, st[i].v, params.spacing, params.gains, dt, 10, pid[i]).a_cmd;
    }
    prev = st;
    for (int i = 0; i < 5; ++i) {
      st[i] = step_longitudinal(st[i], a[i], params.limits, dt);
      worst[i] = std::max(worst[i], sign * (st[i].v - v1));
    }
  }
  return worst;
}

}  // namespace

TEST(ControllerProperty, OvershootDoesNotGrowDownTheString) {
  for (auto [from, to] : {std::pair{20.0, 22.0}, std::pair{20.0, 18.0}}) {
    const auto o = overshoot_after_step(from, to);
    for (int i = 0; i + 1 < 5; ++i) {
      EXPECT_LE(o[i + 1], o[i] + 0.05) << "step " << from << "->" << to << " vehicle " << i + 2;
    }
  }
}
