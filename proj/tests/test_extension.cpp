// A new maneuver row added from outside the library: only public headers,
// no change to any built-in strategy.
#include <gtest/gtest.h>

#include "platoon/manager.hpp"
#include "platoon/strategies.hpp"

using namespace platoon;

namespace {

VehicleId V(int i) { return VehicleId{i}; }

StrategyOutput split_follower(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out;
  out.use(Longitudinal::ACC, c.params->speeds.platoon);
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingGap, c.tick);
  if (c.radar.gap >= 30.0) {
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

struct Drive {
  Parameters params;
  VehicleState ego;
  Drive() {
    ego.id = V(2);
    ego.v = 20.0;
    ego.lane = 1;
  }
  ManageResult tick(VehicleManager& m, Tick t, double gap, std::vector<CloudInstruction> ins = {}) {
    ManageInputs in;
    in.tick = t;
    in.ego = &ego;
    in.radar.valid = true;
    in.radar.gap = gap;
    in.radar.target = V(1);
    in.driver_view = in.radar;
    in.instructions = std::move(ins);
    return m.tick(in);
  }
};

CloudInstruction split_for(VehicleId target) {
  CloudInstruction ins;
  ins.kind = CloudInstruction::Kind::Custom;
  ins.target = target;
  ins.leader = V(1);
  ins.maneuver = Maneuver::extension("Split");
  ins.series = PlatoonInfo::of({V(1), V(2), V(3)});
  return ins;
}

}  // namespace

TEST(Extension, RegisteredAlongsideBuiltins) {
  StrategyRegistry reg;
  register_builtin_strategies(reg);
  const auto before = reg.size();
  reg.register_strategy({Maneuver::extension("Split"), Role::Follower}, split_follower);
  EXPECT_EQ(reg.size(), before + 1);
  EXPECT_TRUE(reg.contains({Maneuver::extension("Split"), Role::Follower}));
  EXPECT_THROW(reg.register_strategy({Maneuver::extension("Split"), Role::Follower}, split_follower), DuplicateKey);
}

TEST(Extension, ManagerRunsTheNewRow) {
  StrategyRegistry reg;
  register_builtin_strategies(reg);
  reg.register_strategy({Maneuver::extension("Split"), Role::Follower}, split_follower);
  Drive d;
  VehicleManager m(V(2), Role::Follower, PlatoonInfo::of({V(1), V(2), V(3)}), 20.0, reg, d.params);

  auto r = d.tick(m, 0, 13.0, {split_for(V(2))});
  EXPECT_EQ(m.maneuver(), Maneuver::extension("Split"));
  EXPECT_EQ(r.controller.kind.longitudinal, Longitudinal::ACC);
  d.tick(m, 1, 20.0);
  EXPECT_EQ(m.maneuver(), Maneuver::extension("Split"));
  r = d.tick(m, 2, 31.0);
  EXPECT_TRUE(m.maneuver().is_platooning());
  bool done = false;
  for (const auto& e : r.events) done = done || e.kind == "ManeuverComplete";
  EXPECT_TRUE(done);
}

TEST(Extension, UnregisteredRowHoldsLastCommand) {
  StrategyRegistry reg;
  register_builtin_strategies(reg);
  Drive d;
  VehicleManager m(V(2), Role::Follower, PlatoonInfo::of({V(1), V(2), V(3)}), 20.0, reg, d.params);
  const auto before = d.tick(m, 0, 13.0);
  EXPECT_EQ(before.controller.kind.longitudinal, Longitudinal::CACC);
  int logged = 0;
  for (Tick t = 1; t < 5; ++t) {
    const auto r = d.tick(m, t, 13.0, t == 1 ? std::vector{split_for(V(2))} : std::vector<CloudInstruction>{});
    EXPECT_EQ(r.controller.kind, before.controller.kind);
    for (const auto& e : r.events) logged += e.kind == "NoStrategy";
  }
  EXPECT_EQ(logged, 1);
}
