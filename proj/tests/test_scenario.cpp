#include <gtest/gtest.h>

#include <string>

#include "platoon/engine.hpp"
#include "platoon/scenario.hpp"

using namespace platoon;

namespace {

const std::string kBase = R"(name: small
run:
  dt: 0.05
  duration: 2
vehicles:
  - {id: 1, s: 100, lane: 1, v: 20}
  - {id: 2, s: 82, lane: 1, v: 20}
platoon: [1, 2]
)";

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const SpecError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Scenario, ParsesRolesFromPlatoonList) {
  const auto s = parse_scenario(kBase);
  ASSERT_EQ(s.vehicles.size(), 2u);
  EXPECT_EQ(s.vehicles[0].role, Role::Leader);
  EXPECT_EQ(s.vehicles[1].role, Role::Follower);
  EXPECT_EQ(s.tick_count(), 40);
}

TEST(Scenario, UnknownKeyRejectedWithLine) {
  const std::string e = error_of(kBase + "colour: red\n");
  EXPECT_NE(e.find("unknown key 'colour'"), std::string::npos) << e;
  EXPECT_NE(e.find("line"), std::string::npos) << e;
}

TEST(Scenario, UnknownParameterRejected) {
  EXPECT_FALSE(error_of(kBase + "parameters:\n  gains: {kq: 1}\n").empty());
}

TEST(Scenario, UnknownTarget) {
  const std::string e = error_of(kBase + "events:\n  - {t: 1, kind: leave, target: 9}\n");
  EXPECT_NE(e.find("UnknownTarget"), std::string::npos) << e;
}

TEST(Scenario, EventsMustBeSorted) {
  EXPECT_FALSE(error_of(kBase + "events:\n  - {t: 1, kind: leave, target: 2}\n  - {t: 0.5, kind: leave, target: 2}\n")
                   .empty());
}

TEST(Scenario, LeaderSlotIsNotAJoinPosition) {
  EXPECT_FALSE(error_of(kBase + "events:\n  - {t: 1, kind: join, target: 2, position: 1}\n").empty());
}

TEST(Scenario, DurationMustBeWholeTicks) {
  std::string text = kBase;
  text.replace(text.find("duration: 2"), 11, "duration: 2.01");
  EXPECT_FALSE(error_of(text).empty());
}

TEST(Scenario, NonPositiveDt) {
  std::string text = kBase;
  text.replace(text.find("dt: 0.05"), 8, "dt: 0");
  EXPECT_FALSE(error_of(text).empty());
}

TEST(Scenario, AllEventKinds) {
  const auto s = parse_scenario(kBase + R"(events:
  - {t: 1, kind: fault, target: 2, fault: V2VFail}
  - {t: 1, kind: cut_in, target: 2, lane: 2, s_offset: 4, duration: 3, ttc_satisfying: true}
  - {t: 1.5, kind: leave, target: 2}
)");
  ASSERT_EQ(s.events.size(), 3u);
  EXPECT_TRUE(s.has_fault());
  const auto& c = std::get<CutInEvent>(s.events[1].kind);
  EXPECT_EQ(c.delta(), -8.0);
}

TEST(Scenario, HashTracksRunRelevantChanges) {
  const auto a = parse_scenario(kBase);
  auto b = a;
  EXPECT_EQ(spec_hash(a), spec_hash(b));
  b.params.gains.kp *= 2.0;
  EXPECT_NE(spec_hash(a), spec_hash(b));
}

TEST(Scenario, BundledFilesLoad) {
  for (const char* n : {"steady", "join_tail", "join_middle", "aeb_head", "aeb_middle", "cut_in", "leave_middle",
                        "leave_tail", "v2v_fault", "radar_fault", "integrated"}) {
    EXPECT_NO_THROW(load_scenario(std::string(PLATOON_SCENARIO_DIR) + "/" + n + ".scenario")) << n;
  }
}

TEST(Scenario, MissingFile) { EXPECT_THROW(load_scenario("/nonexistent/x.scenario"), SpecError); }

TEST(Replay, SameSpecReplaysExactly) {
  const auto s = parse_scenario(kBase);
  EXPECT_TRUE(replay_check(run(s).trace, run(s).trace).equal);
}

TEST(Replay, DifferentSeedSameTrace) {
  auto a = parse_scenario(kBase);
  auto b = a;
  b.run.seed = 99;
  EXPECT_EQ(trace_csv(run(a).trace), trace_csv(run(b).trace));
}

TEST(Replay, ChangedDtIsAHashMismatch) {
  const auto a = parse_scenario(kBase);
  std::string text = kBase;
  text.replace(text.find("dt: 0.05"), 8, "dt: 0.1");
  const auto b = parse_scenario(text);
  EXPECT_THROW(replay_check(run(a).trace, run(b).trace), SpecHashMismatch);
}
