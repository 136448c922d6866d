#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "platoon/engine.hpp"
#include "platoon/strategies.hpp"

using namespace platoon;

namespace {

const char* kAll[] = {"steady",       "join_tail",  "join_middle", "aeb_head",    "aeb_middle", "cut_in",
                      "leave_middle", "leave_tail", "v2v_fault",   "radar_fault", "integrated"};
const char* kFaultFree[] = {"steady", "join_tail",    "join_middle", "aeb_head",  "aeb_middle",
                            "cut_in", "leave_middle", "leave_tail",  "integrated"};

ScenarioSpec bundled(const std::string& name) {
  return load_scenario(std::string(PLATOON_SCENARIO_DIR) + "/" + name + ".scenario");
}

const RunResult& result_of(const std::string& name, bool degradation = true) {
  static std::map<std::pair<std::string, bool>, RunResult> cache;
  auto key = std::pair{name, degradation};
  auto it = cache.find(key);
  if (it == cache.end()) {
    ScenarioSpec spec = bundled(name);
    spec.params.degradation_enabled = degradation;
    it = cache.emplace(key, run(spec)).first;
  }
  return it->second;
}

std::vector<VehicleState> present(const TraceRow& row) {
  std::vector<VehicleState> out;
  for (const auto& s : row.vehicles) {
    if (s.present) out.push_back(s.state);
  }
  return out;
}

}  // namespace

TEST(EngineProperty, SpeedNonNegativeAndAccelBounded) {
  const DynamicsLimits lim;
  for (const char* n : kAll) {
    for (bool deg : {true, false}) {
      for (const auto& row : result_of(n, deg).trace.rows) {
        for (const auto& s : row.vehicles) {
          if (!s.present) continue;
          ASSERT_GE(s.state.v, 0.0) << n << " t=" << row.time;
          ASSERT_LE(std::abs(s.state.a), std::max(lim.a_max, lim.d_max)) << n << " t=" << row.time;
        }
      }
    }
  }
}

TEST(EngineProperty, OneRowPerTick) {
  for (const char* n : kAll) {
    const auto& r = result_of(n);
    const auto spec = bundled(n);
    if (r.report.halted) continue;
    ASSERT_EQ(static_cast<Tick>(r.trace.rows.size()), spec.tick_count()) << n;
    for (std::size_t i = 0; i < r.trace.rows.size(); ++i) ASSERT_EQ(r.trace.rows[i].tick, static_cast<Tick>(i) + 1);
  }
}

TEST(EngineProperty, MembershipIsConserved) {
  for (const char* n : kAll) {
    for (const auto& row : result_of(n).trace.rows) {
      std::map<VehicleId, int> count;
      for (const auto& s : row.vehicles) {
        if (!s.present) continue;
        ASSERT_EQ(static_cast<int>(s.members.size()), s.role == Role::Leader ? s.platoon_size : 0);
        for (VehicleId m : s.members) ++count[m];
        if (s.role == Role::Leader) ASSERT_EQ(s.members.front(), s.state.id);
      }
      for (const auto& [id, c] : count) ASSERT_LE(c, 1) << n << " v" << id.value << " t=" << row.time;
    }
  }
}

TEST(EngineProperty, SeriesMatchesRoadOrder) {
  for (const char* n : kFaultFree) {
    for (const auto& row : result_of(n).trace.rows) {
      for (const auto& s : row.vehicles) {
        for (std::size_t i = 1; i < s.members.size(); ++i) {
          ASSERT_GT(row.at(s.members[i - 1]).state.s, row.at(s.members[i]).state.s)
              << n << " t=" << row.time << " v" << s.members[i - 1].value << " before v" << s.members[i].value;
        }
      }
    }
  }
}

TEST(EngineProperty, JoinHandshakeIsLive) {
  for (const char* n : kFaultFree) {
    const auto& r = result_of(n);
    const Tick delay = bundled(n).params.bus.delivery_delay_ticks;
    for (const auto& e : r.events) {
      if (e.kind != "Send" || e.detail != "JoinFlag") continue;
      int updates = 0;
      for (const auto& u : r.events) {
        if (u.kind == "Send" && u.detail == "UpdateFlag" && u.vehicle == VehicleId{1} && u.tick > e.tick &&
            u.tick <= e.tick + std::max<Tick>(delay, 1) + 1) {
          ++updates;
        }
      }
      EXPECT_EQ(updates, 1) << n << " JoinFlag from v" << e.vehicle.value << " at tick " << e.tick;
    }
    // Every join the leader starts, it finishes.
    int started = 0;
    int finished = 0;
    for (const auto& e : r.events) {
      if (e.vehicle != VehicleId{1}) continue;
      const bool join = e.detail.starts_with("JoinTail") || e.detail.starts_with("JoinMiddle");
      if (join && e.kind == "ManeuverStart") ++started;
      if (join && e.kind == "ManeuverComplete") ++finished;
    }
    EXPECT_EQ(started, finished) << n;
  }
}

TEST(EngineProperty, TakeoverIsTerminal) {
  for (const char* n : kAll) {
    for (bool deg : {true, false}) {
      const auto& r = result_of(n, deg);
      // Once the driver has the vehicle it never becomes a follower again.
      std::map<VehicleId, Tick> handed;
      for (const auto& e : r.events) {
        if (e.kind == "TakeoverComplete" && !handed.contains(e.vehicle)) handed[e.vehicle] = e.tick;
      }
      for (const auto& row : r.trace.rows) {
        for (const auto& [id, t] : handed) {
          if (row.tick > t) ASSERT_NE(row.at(id).role, Role::Follower) << n << " v" << id.value;
        }
      }
    }
  }
}

TEST(EngineProperty, AebMeansFullBraking) {
  const double d_max = DynamicsLimits{}.d_max;
  for (const char* n : kAll) {
    const auto& rows = result_of(n).trace.rows;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      for (std::size_t k = 0; k < rows[i].vehicles.size(); ++k) {
        const auto& s = rows[i].vehicles[k];
        if (!s.present || s.intruder || s.controller != Longitudinal::AEB) continue;
        if (rows[i - 1].vehicles[k].state.v > 0.0) ASSERT_EQ(s.state.a, -d_max) << n << " t=" << rows[i].time;
      }
    }
  }
}

TEST(EngineProperty, NoCollisionsWithDegradation) {
  for (const char* n : kAll) EXPECT_TRUE(result_of(n).report.collisions.empty()) << n;
}

TEST(EngineProperty, MinGapDerivedFromTrace) {
  for (const char* n : {"aeb_head", "cut_in", "v2v_fault"}) {
    const auto& r = result_of(n);
    const auto params = bundled(n).params;
    std::map<std::pair<VehicleId, VehicleId>, double> mins;
    for (const auto& row : r.trace.rows) {
      for (const auto& [a, b, g] : true_gaps(present(row), params)) {
        auto [it, fresh] = mins.try_emplace({a, b}, g);
        if (!fresh) it->second = std::min(it->second, g);
      }
    }
    for (const auto& [pair, g] : r.report.min_gap) {
      ASSERT_TRUE(mins.contains(pair)) << n;
      EXPECT_LE(g, mins[pair] + 1e-9) << n;
    }
  }
}

TEST(Degradation, RadarFaultSwitchesControllers) {
  const auto spec = bundled("radar_fault");
  const auto& r = result_of("radar_fault");
  Tick fault = 0;
  for (const auto& e : spec.events) {
    if (std::holds_alternative<FaultInjectionEvent>(e.kind)) fault = spec.tick_of(e.t);
  }
  const Tick latency = spec.tick_of(spec.params.timing.heartbeat_timeout);
  const auto& rows = r.trace.rows;
  EXPECT_EQ(rows[static_cast<std::size_t>(fault)].at(VehicleId{3}).controller, Longitudinal::CC);
  for (int id : {4, 5}) {
    const auto& s = rows[static_cast<std::size_t>(fault + latency + spec.params.bus.delivery_delay_ticks)].at(VehicleId{id});
    EXPECT_EQ(s.controller, Longitudinal::ACC) << id;
  }
  for (int id : {1, 2}) EXPECT_NE(rows[static_cast<std::size_t>(fault + 20)].at(VehicleId{id}).controller, Longitudinal::ACC);
}

TEST(Degradation, WithoutItRadarFaultCollides) {
  EXPECT_FALSE(result_of("radar_fault", false).report.collisions.empty());
}

TEST(Trace, CsvShape) {
  const auto& r = result_of("steady");
  const std::string csv = trace_csv(r.trace);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_TRUE(header.starts_with("tick,time,v1_s,v1_lane,v1_offset,v1_v,v1_a,v1_controller"));
  std::string first;
  std::getline(in, first);
  EXPECT_TRUE(first.starts_with("1,0.050000,")) << first;
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, r.trace.rows.size() + 1);
}

TEST(Trace, ReportAndEventsAreStable) {
  const auto spec = bundled("join_tail");
  const auto a = run(spec);
  const auto b = run(spec);
  EXPECT_EQ(report_text(a.report, spec.run.dt), report_text(b.report, spec.run.dt));
  EXPECT_EQ(events_text(a.events, spec.run.dt), events_text(b.events, spec.run.dt));
}

TEST(Registry, MissingCellIsLoggedAndHeld) {
  StrategyRegistry reg;
  register_builtin_strategies(reg);
  reg.remove({Maneuver::of(ManeuverKind::CutIn), Role::Follower});
  const auto r = run(bundled("cut_in"), &reg);
  int logged = 0;
  for (const auto& e : r.events) logged += e.kind == "NoStrategy";
  EXPECT_GT(logged, 0);
  // Other maneuvers still run with the cell gone.
  const auto j = run(bundled("join_tail"), &reg);
  EXPECT_EQ(j.report.completions.empty(), false);
  EXPECT_TRUE(j.report.collisions.empty());
}

TEST(Registry, EveryOtherScenarioSurvivesOneRemoval) {
  StrategyRegistry full;
  register_builtin_strategies(full);
  const auto baseline = result_of("leave_tail").report.completions.size();
  for (const StrategyKey& k : full.keys()) {
    if (k.maneuver.kind == ManeuverKind::LeaveTail || k.maneuver.is_platooning()) continue;
    StrategyRegistry cut;
    register_builtin_strategies(cut);
    cut.remove(k);
    const auto r = run(bundled("leave_tail"), &cut);
    EXPECT_EQ(r.report.completions.size(), baseline) << to_string(k);
  }
}
