#include <gtest/gtest.h>

#include <vector>

#include "platoon/cloud.hpp"
#include "platoon/dynamics.hpp"

using namespace platoon;

namespace {

VehicleId V(int i) { return VehicleId{i}; }

ScenarioSpec five(std::vector<ScenarioEvent> events = {}) {
  ScenarioSpec s;
  s.name = "t";
  s.run.duration = 60;
  for (int i = 1; i <= 5; ++i) s.vehicles.push_back({V(i), 100.0 - 18.0 * (i - 1), 1, 20.0, Role::Follower});
  s.vehicles[0].role = Role::Leader;
  s.platoon = {V(1), V(2), V(3), V(4), V(5)};
  s.events = std::move(events);
  return s;
}

std::vector<CloudVehicleView> fleet(std::vector<int> members, std::vector<int> free) {
  std::vector<VehicleId> ids;
  for (int m : members) ids.push_back(V(m));
  std::vector<CloudVehicleView> out;
  for (int m : members) {
    out.push_back({V(m), m == members.front() ? Role::Leader : Role::Follower, Maneuver::platooning(),
                   PlatoonInfo::of(ids), false});
  }
  for (int f : free) out.push_back({V(f), Role::FreeVehicle, Maneuver::platooning(), {}, false});
  return out;
}

}  // namespace

TEST(Cloud, NothingDueNothingIssued) {
  CloudState st;
  const auto spec = five();
  const auto f = fleet({1, 2, 3, 4, 5}, {});
  for (Tick t = 0; t < 50; ++t) EXPECT_TRUE(cloud_tick(st, spec, {}, t, f).empty());
}

TEST(Cloud, ScriptedJoinAtItsTick) {
  CloudState st;
  auto spec = five({{10.0, JoinInstructionEvent{V(2), 0}}});
  spec.platoon = {V(1)};
  const auto f = fleet({1}, {2, 3, 4, 5});
  for (Tick t = 0; t < 200; ++t) EXPECT_TRUE(cloud_tick(st, spec, {}, t, f).empty()) << t;
  const auto out = cloud_tick(st, spec, {}, 200, f);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].kind, CloudInstruction::Kind::Join);
  EXPECT_EQ(out[0].target, V(2));
  EXPECT_EQ(out[0].maneuver, Maneuver::of(ManeuverKind::JoinTail));
  EXPECT_EQ(out[0].series.id_series, std::vector<VehicleId>{V(1)});
}

TEST(Cloud, JoinRequestAnsweredAfterServiceDelay) {
  CloudState st;
  auto spec = five();
  spec.platoon = {V(1)};
  const auto f = fleet({1}, {2, 3, 4, 5});
  const std::vector<V2VMessage> up = {{V(2), 600, JoinRequest{}}};
  EXPECT_TRUE(cloud_tick(st, spec, up, 601, f).empty());
  for (Tick t = 602; t < 620; ++t) EXPECT_TRUE(cloud_tick(st, spec, up, t, f).empty()) << t;
  const auto out = cloud_tick(st, spec, up, 620, f);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].target, V(2));
  EXPECT_EQ(out[0].issued, 620);
  EXPECT_EQ(st.answered.size(), 1u);
}

TEST(Cloud, EachRequestAnsweredOnce) {
  CloudState st;
  auto spec = five();
  spec.platoon = {V(1)};
  auto f = fleet({1}, {2, 3, 4, 5});
  const std::vector<V2VMessage> up = {{V(2), 10, JoinRequest{}}};
  int issued = 0;
  for (Tick t = 11; t < 200; ++t) {
    issued += static_cast<int>(cloud_tick(st, spec, up, t, f).size());
    // Pretend the join finished straight away.
    f = fleet({1}, {2, 3, 4, 5});
  }
  EXPECT_EQ(issued, 1);
}

TEST(Cloud, SingleOutstandingJoin) {
  CloudState st;
  auto spec = five({{1.0, JoinInstructionEvent{V(2), 0}}, {1.0, JoinInstructionEvent{V(3), 0}}});
  spec.platoon = {V(1)};
  auto f = fleet({1}, {2, 3, 4, 5});
  auto out = cloud_tick(st, spec, {}, 20, f);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].target, V(2));
  // The leader is busy with the first join.
  f[0].maneuver = Maneuver::of(ManeuverKind::JoinTail);
  f[1].maneuver = Maneuver::of(ManeuverKind::JoinTail);
  for (Tick t = 21; t < 100; ++t) EXPECT_TRUE(cloud_tick(st, spec, {}, t, f).empty());
  f = fleet({1, 2}, {3, 4, 5});
  out = cloud_tick(st, spec, {}, 100, f);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].target, V(3));
}

TEST(Cloud, LeaveTypeFollowsPosition) {
  CloudState st;
  const auto spec = five({{0.0, LeaveInstructionEvent{V(3)}}, {0.0, LeaveInstructionEvent{V(5)}}});
  auto out = cloud_tick(st, spec, {}, 0, fleet({1, 2, 3, 4, 5}, {}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].maneuver, Maneuver::of(ManeuverKind::LeaveMiddle));
  out = cloud_tick(st, spec, {}, 1, fleet({1, 2, 4, 5}, {3}));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].maneuver, Maneuver::of(ManeuverKind::LeaveTail));
}

TEST(Cloud, InstructionStreamIsDeterministic) {
  auto spec = five({{1.0, JoinInstructionEvent{V(4), 3}}});
  spec.platoon = {V(1), V(2), V(3)};
  auto stream = [&] {
    CloudState st;
    std::vector<std::pair<Tick, VehicleId>> out;
    const auto f = fleet({1, 2, 3}, {4, 5});
    for (Tick t = 0; t < 100; ++t) {
      for (const auto& i : cloud_tick(st, spec, {}, t, f)) out.emplace_back(i.issued, i.target);
    }
    return out;
  };
  EXPECT_EQ(stream(), stream());
}

TEST(Intruder, SpawnsAheadOfTarget) {
  const Parameters params;
  VehicleState target;
  target.id = V(2);
  target.s = 82.0;
  target.lane = 1;
  target.v = 20.0;
  CutInEvent ev;
  ev.target = V(2);
  ev.lane = 2;
  ev.s_offset = 7.0;
  ev.ttc_satisfying = false;
  const Intruder in = spawn_cut_in(ev, target, V(6), params);
  EXPECT_EQ(in.state.lane, 2);
  EXPECT_DOUBLE_EQ(in.state.rear(), 89.0);
  EXPECT_DOUBLE_EQ(in.state.v, 19.0);
  EXPECT_EQ(in.phase, Intruder::Phase::Merging);
}

TEST(Intruder, MergesHoldsAndLeaves) {
  const Parameters params;
  VehicleState target;
  target.id = V(2);
  target.s = 82.0;
  target.lane = 1;
  target.v = 20.0;
  CutInEvent ev;
  ev.target = V(2);
  ev.lane = 2;
  ev.s_offset = 20.0;
  ev.duration = 2.0;
  Intruder in = spawn_cut_in(ev, target, V(6), params);
  bool held = false;
  for (Tick t = 0; t < 400 && in.active(); ++t) {
    std::vector<VehicleState> snap = {target, in.state};
    const auto cmd = drive_intruder(in, snap, params, t);
    if (in.phase == Intruder::Phase::Holding) {
      held = true;
      EXPECT_EQ(in.state.lane, 1);
    }
    if (!in.active()) break;
    in.state = step_longitudinal(step_lateral(in.state, cmd.lateral, params.lanes, params.dt), cmd.a, params.limits,
                                 params.dt);
    target.s += target.v * params.dt;
  }
  EXPECT_TRUE(held);
  EXPECT_FALSE(in.active());
}
