#include "platoon/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "platoon/fsm.hpp"
#include "platoon/manager.hpp"
#include "platoon/strategies.hpp"

namespace platoon {

namespace {

// Pinned tolerances.
constexpr double kSteadyGapLo = 12.0;
constexpr double kSteadyGapHi = 14.0;
constexpr double kJoinFlagGap = 30.0;
constexpr double kEvadeGapTol = 0.5;
constexpr double kStandstillGap = 10.0;
constexpr double kStopTimeTol = 0.2;
constexpr double kAccGapLo = 17.0;
constexpr double kAccGapHi = 19.0;
constexpr double kMonotoneTol = 1e-9;
constexpr double kSpeedTol = 1e-6;

VehicleId V(int i) { return VehicleId{i}; }

std::string fmt(double x, int prec = 3) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(prec) << x;
  return o.str();
}

double gap(const TraceRow& row, VehicleId ahead, VehicleId behind) {
  return row.at(ahead).state.rear() - row.at(behind).state.s;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// First event matching `pred`, or nullptr.
const SimEvent* first_event(const RunResult& r, const std::function<bool(const SimEvent&)>& pred) {
  for (const auto& e : r.events) {
    if (pred(e)) return &e;
  }
  return nullptr;
}

const SimEvent* first_of(const RunResult& r, VehicleId v, const std::string& kind, const std::string& detail_prefix = {}) {
  return first_event(r, [&](const SimEvent& e) {
    return e.vehicle == v && e.kind == kind && e.detail.rfind(detail_prefix, 0) == 0;
  });
}

/// Trace row recording the outcome of tick `t` (row tick = t + 1).
const TraceRow* row_of(const RunResult& r, Tick t) {
  const auto idx = static_cast<std::size_t>(t);
  return idx < r.trace.rows.size() ? &r.trace.rows[idx] : nullptr;
}

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back(what);
    }
  }
  void info(const std::string& what) { notes.push_back(what); }
  CriterionResult result(int id, std::string name) const {
    std::string detail;
    for (std::size_t i = 0; i < notes.size(); ++i) detail += (i ? "; " : "") + notes[i];
    return {id, std::move(name), ok, detail};
  }
};

Tick tick_at(const ScenarioSpec& spec, double t) { return spec.tick_of(t); }

double fault_time(const ScenarioSpec& spec) {
  for (const auto& e : spec.events) {
    if (std::holds_alternative<FaultInjectionEvent>(e.kind)) return e.t;
  }
  return 0.0;
}

// --- criteria ----------------------------------------------------------------

CriterionResult steady(const AcceptanceOptions& opt) {
  Check c;
  const ScenarioSpec spec = load_bundled(opt, "steady");
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run(spec);
  const double wall = seconds_since(t0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& row : r.trace.rows) {
    if (row.time < 30.0) continue;
    for (int i = 2; i <= 5; ++i) {
      lo = std::min(lo, row.at(V(i)).radar_gap);
      hi = std::max(hi, row.at(V(i)).radar_gap);
    }
  }
  c.expect(lo >= kSteadyGapLo && hi <= kSteadyGapHi, "radar gaps after 30 s outside [12,14]");
  c.expect(wall < 2.0, "runtime " + fmt(wall) + " s >= 2 s");
  c.info("gaps after 30 s in [" + fmt(lo) + ", " + fmt(hi) + "] m, runtime " + fmt(wall) + " s");
  return c.result(1, "steady platooning");
}

CriterionResult join_tail(const AcceptanceOptions& opt) {
  Check c;
  const ScenarioSpec spec = load_bundled(opt, "join_tail");
  const RunResult r = run(spec);
  const VehicleId joiner = V(5);
  const SimEvent* flag = first_of(r, joiner, "Send", "JoinFlag");
  const SimEvent* done = first_of(r, V(1), "ManeuverComplete", "JoinTail");
  c.expect(flag != nullptr, "joiner never sent JoinFlag");
  c.expect(done != nullptr, "leader never completed JoinTail");
  if (!flag || !done) return c.result(2, "join tail");

  const double flag_gap = row_of(r, flag->tick)->at(joiner).radar_gap;
  c.expect(flag_gap <= kJoinFlagGap, "JoinFlag at gap " + fmt(flag_gap) + " m > 30 m");
  if (flag->tick > 0) {
    c.expect(row_of(r, flag->tick - 1)->at(joiner).radar_gap > kJoinFlagGap, "JoinFlag later than the first tick at 30 m");
  }
  const auto& last = r.trace.rows.back();
  c.expect(last.at(joiner).role == Role::Follower, "joiner not a follower at the end");
  c.expect(last.at(joiner).controller == Longitudinal::CACC, "joiner not on CACC at the end");
  const int before = r.trace.rows.front().at(V(1)).platoon_size;
  const int after = last.at(V(1)).platoon_size;
  c.expect(after == before + 1, "leader size " + std::to_string(before) + " -> " + std::to_string(after));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const double settle_from = static_cast<double>(done->tick) * spec.run.dt + 20.0;
  for (const auto& row : r.trace.rows) {
    if (row.time < settle_from) continue;
    lo = std::min(lo, row.at(joiner).radar_gap);
    hi = std::max(hi, row.at(joiner).radar_gap);
  }
  c.expect(std::isfinite(lo), "run ends before the settling window");
  c.expect(lo >= kSteadyGapLo && hi <= kSteadyGapHi, "joiner gap 20 s after join outside 13 +/- 1 m");
  c.info("JoinFlag at gap " + fmt(flag_gap) + " m, size " + std::to_string(before) + "->" + std::to_string(after) +
         ", settled gap [" + fmt(lo) + ", " + fmt(hi) + "] m");
  return c.result(2, "join tail");
}

CriterionResult join_middle(const AcceptanceOptions& opt) {
  Check c;
  const ScenarioSpec spec = load_bundled(opt, "join_middle");
  const RunResult r = run(spec);
  const VehicleId evader = V(3);
  const SimEvent* start = first_of(r, evader, "ManeuverStart", "JoinMiddle");
  const SimEvent* evade = first_of(r, evader, "Send", "EvadeFlag");
  const SimEvent* done = first_of(r, V(1), "ManeuverComplete", "JoinMiddle");
  c.expect(start && evade && done, "join middle did not run to completion");
  if (!start || !evade || !done) return c.result(3, "join middle");

  const auto& on_start = row_of(r, start->tick)->at(evader);
  c.expect(on_start.v_set && std::abs(*on_start.v_set - 15.0) < kSpeedTol, "evader command not 15 m/s on instruction");
  const auto& on_flag = row_of(r, evade->tick)->at(evader);
  const auto& after_flag = row_of(r, evade->tick + 1)->at(evader);
  c.expect(after_flag.v_set && std::abs(*after_flag.v_set - 20.0) < kSpeedTol, "evader command not 20 m/s after EvadeFlag");
  c.expect(std::abs(on_flag.radar_gap - kJoinFlagGap) <= kEvadeGapTol,
           "EvadeFlag at gap " + fmt(on_flag.radar_gap) + " m, not 30 +/- 0.5");
  c.expect(r.report.collisions.empty(), "collision");
  const auto& last = r.trace.rows.back();
  c.expect(last.at(V(5)).role == Role::Follower, "joiner not a follower at the end");
  c.info("EvadeFlag at gap " + fmt(on_flag.radar_gap) + " m after " +
         fmt(static_cast<double>(evade->tick - start->tick) * spec.run.dt, 2) + " s");
  return c.result(3, "join middle");
}

CriterionResult aeb_head(const AcceptanceOptions& opt) {
  Check c;
  const ScenarioSpec spec = load_bundled(opt, "aeb_head");
  const RunResult r = run(spec);
  c.expect(r.report.collisions.empty(), std::to_string(r.report.collisions.size()) + " collisions");
  const double d_max = spec.params.limits.d_max;

  double worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 5; ++i) {
    std::optional<std::size_t> aeb_row;
    std::optional<std::size_t> stop_row;
    for (std::size_t k = 0; k < r.trace.rows.size(); ++k) {
      const auto& s = r.trace.rows[k].at(V(i));
      if (!aeb_row && s.controller == Longitudinal::AEB) aeb_row = k;
      if (aeb_row && s.state.v <= 0.0) {
        stop_row = k;
        break;
      }
    }
    if (!aeb_row || !stop_row) {
      c.expect(false, "v" + std::to_string(i) + " never braked to standstill");
      continue;
    }
    // Speed entering the braking tick.
    const double v0 = *aeb_row > 0 ? r.trace.rows[*aeb_row - 1].at(V(i)).state.v : spec.vehicles[i - 1].v;
    const double took = static_cast<double>(*stop_row - *aeb_row + 1) * spec.run.dt;
    const double bound = v0 / d_max + kStopTimeTol;
    worst_margin = std::min(worst_margin, bound - took);
    c.expect(took <= bound, "v" + std::to_string(i) + " stop took " + fmt(took) + " s > " + fmt(bound) + " s");
  }

  const TraceRow* all_stopped = nullptr;
  for (const auto& row : r.trace.rows) {
    bool stopped = true;
    for (int i = 1; i <= 5; ++i) stopped = stopped && row.at(V(i)).state.v <= 0.0;
    if (stopped) {
      all_stopped = &row;
      break;
    }
  }
  c.expect(all_stopped != nullptr, "never all at standstill");
  if (all_stopped) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 2; i <= 5; ++i) min_gap = std::min(min_gap, gap(*all_stopped, V(i - 1), V(i)));
    c.expect(min_gap > kStandstillGap, "standstill gap " + fmt(min_gap) + " m <= 10 m");
    c.info("min standstill gap " + fmt(min_gap) + " m at t=" + fmt(all_stopped->time, 2) + " s");
  }
  c.info("worst stop-time margin " + fmt(worst_margin) + " s");
  return c.result(4, "AEB head");
}

CriterionResult cut_in(const AcceptanceOptions& opt) {
  Check c;
  const ScenarioSpec spec = load_bundled(opt, "cut_in");
  const RunResult r = run(spec);
  c.expect(r.report.collisions.empty(), "collision");
  const VehicleId intruder = V(r.trace.vehicle_count + 1);

  std::optional<Tick> detect;
  for (std::size_t k = 0; k < r.trace.rows.size(); ++k) {
    if (r.trace.rows[k].at(V(2)).radar_target == intruder) {
      detect = static_cast<Tick>(k);
      break;
    }
  }
  c.expect(detect.has_value(), "vehicle 2 never detected the intruder");
  const SimEvent* aeb = first_event(r, [](const SimEvent& e) {
    return e.kind == "ManeuverStart" && (e.detail.rfind("AEB", 0) == 0);
  });
  c.expect(aeb == nullptr, "AEB triggered");
  const SimEvent* safe = first_of(r, V(2), "Send", "SafeFlag");
  c.expect(safe != nullptr, "no cut-out detected");
  if (!detect || !safe) return c.result(5, "cut in");

  for (int i = 2; i <= 5; ++i) {
    std::optional<Tick> acc_at;
    for (Tick t = *detect; t < static_cast<Tick>(r.trace.rows.size()); ++t) {
      if (r.trace.rows[static_cast<std::size_t>(t)].at(V(i)).controller == Longitudinal::ACC) {
        acc_at = t;
        break;
      }
    }
    c.expect(acc_at && *acc_at <= *detect + 1, "v" + std::to_string(i) + " not on ACC within one tick of detection");
  }

  // Steady ACC gaps just before the cut-out.
  const TraceRow& before = *row_of(r, safe->tick - 1);
  double lo = before.at(V(2)).radar_gap;
  double hi = lo;
  for (int i = 3; i <= 5; ++i) {
    lo = std::min(lo, before.at(V(i)).radar_gap);
    hi = std::max(hi, before.at(V(i)).radar_gap);
  }
  c.expect(lo >= kAccGapLo && hi <= kAccGapHi, "ACC gaps before cut-out in [" + fmt(lo) + ", " + fmt(hi) + "]");

  const double back_by = before.time + 30.0;
  double lo2 = std::numeric_limits<double>::infinity();
  double hi2 = -lo2;
  for (const auto& row : r.trace.rows) {
    if (row.time < back_by) continue;
    for (int i = 2; i <= 5; ++i) {
      lo2 = std::min(lo2, row.at(V(i)).radar_gap);
      hi2 = std::max(hi2, row.at(V(i)).radar_gap);
    }
  }
  c.expect(std::isfinite(lo2), "run ends before the recovery window");
  c.expect(lo2 >= kSteadyGapLo && hi2 <= kSteadyGapHi, "gaps 30 s after cut-out outside 13 +/- 1 m");
  c.info("ACC gaps [" + fmt(lo) + ", " + fmt(hi) + "] m, recovered [" + fmt(lo2) + ", " + fmt(hi2) + "] m");
  return c.result(5, "cut in");
}

double min_gap_behind_v2(const RunResult& r, double from) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : r.trace.rows) {
    if (row.time < from) continue;
    for (int i = 3; i <= 5; ++i) m = std::min(m, gap(row, V(i - 1), V(i)));
  }
  return m;
}

struct FaultRuns {
  ScenarioSpec spec;
  RunResult on;
  RunResult off;
};

FaultRuns fault_runs(const AcceptanceOptions& opt, const std::string& name) {
  FaultRuns f{load_bundled(opt, name), {}, {}};
  f.on = run(f.spec);
  ScenarioSpec off = f.spec;
  off.params.degradation_enabled = false;
  f.off = run(off);
  return f;
}

CriterionResult v2v_fault_on(const FaultRuns& f) {
  Check c;
  const auto& r = f.on;
  const Tick fault = tick_at(f.spec, fault_time(f.spec));
  const Tick limit = fault + tick_at(f.spec, f.spec.params.timing.heartbeat_timeout) + f.spec.params.bus.delivery_delay_ticks;
  c.expect(r.report.collisions.empty(), "collision");
  for (int i = 3; i <= 5; ++i) {
    std::optional<Tick> acc_at;
    for (Tick t = fault; t < static_cast<Tick>(r.trace.rows.size()); ++t) {
      if (r.trace.rows[static_cast<std::size_t>(t)].at(V(i)).controller == Longitudinal::ACC) {
        acc_at = t;
        break;
      }
    }
    c.expect(acc_at && *acc_at <= limit, "v" + std::to_string(i) + " not on ACC within 0.5 s + delay");
    if (acc_at) c.info("v" + std::to_string(i) + " ACC after " + fmt(static_cast<double>(*acc_at - fault) * f.spec.run.dt, 2) + " s");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool cacc = true;
  for (std::size_t k = static_cast<std::size_t>(fault); k < r.trace.rows.size(); ++k) {
    const auto& s = r.trace.rows[k].at(V(2));
    cacc = cacc && s.controller == Longitudinal::CACC;
    lo = std::min(lo, s.radar_gap);
    hi = std::max(hi, s.radar_gap);
  }
  c.expect(cacc, "v2 left CACC");
  c.expect(lo >= kSteadyGapLo && hi <= kSteadyGapHi, "v2 gap outside 13 +/- 1 m");
  const auto& last = r.trace.rows.back();
  c.expect(last.at(V(1)).platoon_size == 2, "leader size " + std::to_string(last.at(V(1)).platoon_size) + " != 2");
  c.expect(last.at(V(2)).role == Role::Follower, "v2 not a follower");
  c.info("v2 gap [" + fmt(lo) + ", " + fmt(hi) + "] m");
  return c.result(6, "V2V fault, degradation on");
}

CriterionResult v2v_fault_off(const FaultRuns& f) {
  Check c;
  const auto& r = f.off;
  const double t_fault = fault_time(f.spec);
  const Tick fault = tick_at(f.spec, t_fault);
  const Tick subst = fault + tick_at(f.spec, f.spec.params.timing.heartbeat_timeout) + 1;
  const Tick window = subst + tick_at(f.spec, 1.0);
  const double d_max = f.spec.params.limits.d_max;
  std::optional<Tick> sat;
  for (Tick t = fault; t <= window && t < static_cast<Tick>(r.trace.rows.size()); ++t) {
    if (r.trace.rows[static_cast<std::size_t>(t)].at(V(3)).state.a <= -d_max + 1e-9) {
      sat = t;
      break;
    }
  }
  c.expect(sat.has_value(), "v3 deceleration did not saturate within 1 s of substitution");
  const double on = min_gap_behind_v2(f.on, t_fault);
  const double off = min_gap_behind_v2(f.off, t_fault);
  c.expect(off < on, "min gap behind v2 off " + fmt(off) + " m not below on " + fmt(on) + " m");
  if (sat) c.info("saturated " + fmt(static_cast<double>(*sat - fault) * f.spec.run.dt, 2) + " s after fault");
  c.info("min gap behind v2: off " + fmt(off) + " m, on " + fmt(on) + " m");
  return c.result(7, "V2V fault, degradation off");
}

CriterionResult radar_fault_on(const FaultRuns& f) {
  Check c;
  const auto& r = f.on;
  const double dt = f.spec.run.dt;
  const Tick fault = tick_at(f.spec, fault_time(f.spec));
  c.expect(r.report.collisions.empty(), "collision");
  const double v_fault = r.trace.rows[static_cast<std::size_t>(fault - 1)].at(V(3)).state.v;
  const SimEvent* takeover = first_of(r, V(3), "TakeoverComplete");
  const Tick until = takeover ? takeover->tick : static_cast<Tick>(r.trace.rows.size());
  bool cc_ok = true;
  // The faulty vehicle holds speed while its FaultFlag is in flight.
  for (Tick t = fault + std::max<Tick>(1, f.spec.params.bus.delivery_delay_ticks); t < until; ++t) {
    const auto& s = r.trace.rows[static_cast<std::size_t>(t)].at(V(3));
    cc_ok = cc_ok && s.controller == Longitudinal::CC && s.v_set && std::abs(*s.v_set - (v_fault - 2.0)) < kSpeedTol;
  }
  c.expect(cc_ok, "v3 not on CC at v_fault - 2 until takeover");
  const Tick limit = fault + tick_at(f.spec, f.spec.params.timing.heartbeat_timeout) + f.spec.params.bus.delivery_delay_ticks;
  for (int i = 4; i <= 5; ++i) {
    std::optional<Tick> acc_at;
    for (Tick t = fault; t < static_cast<Tick>(r.trace.rows.size()); ++t) {
      if (r.trace.rows[static_cast<std::size_t>(t)].at(V(i)).controller == Longitudinal::ACC) {
        acc_at = t;
        break;
      }
    }
    c.expect(acc_at && *acc_at <= limit, "v" + std::to_string(i) + " not on ACC after the fault");
  }
  const Tick end = std::min<Tick>(fault + tick_at(f.spec, 10.0), static_cast<Tick>(r.trace.rows.size()) - 1);
  double worst_drop = 0.0;
  for (auto [a, b] : {std::pair{2, 3}, std::pair{3, 4}}) {
    for (Tick t = fault; t < end; ++t) {
      const double g0 = gap(r.trace.rows[static_cast<std::size_t>(t)], V(a), V(b));
      const double g1 = gap(r.trace.rows[static_cast<std::size_t>(t + 1)], V(a), V(b));
      worst_drop = std::max(worst_drop, g0 - g1);
    }
  }
  c.expect(worst_drop <= kMonotoneTol, "gap around v3 shrank by " + fmt(worst_drop, 6) + " m in one tick");
  c.info("v_fault " + fmt(v_fault) + " m/s, largest one-tick gap decrease " + fmt(worst_drop, 6) + " m");
  (void)dt;
  return c.result(8, "radar fault, degradation on");
}

CriterionResult radar_fault_off(const FaultRuns& f) {
  Check c;
  const double t_fault = fault_time(f.spec);
  const CollisionRecord* hit = nullptr;
  for (const auto& col : f.off.report.collisions) {
    if (col.a == V(2) && col.b == V(3)) {
      hit = &col;
      break;
    }
  }
  c.expect(hit != nullptr, "no v2-v3 collision");
  if (hit) {
    c.expect(hit->time - t_fault <= 10.0, "collision " + fmt(hit->time - t_fault, 2) + " s after fault");
    c.info("v2-v3 collision at t=" + fmt(hit->time, 2) + " s (" + fmt(hit->time - t_fault, 2) + " s after fault)");
  }
  return c.result(9, "radar fault, degradation off");
}

CriterionResult integrated(const AcceptanceOptions& opt) {
  Check c;
  const ScenarioSpec spec = load_bundled(opt, "integrated");
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run(spec);
  const double wall = seconds_since(t0);
  c.expect(r.report.collisions.empty(), std::to_string(r.report.collisions.size()) + " collisions");
  c.expect(wall < 10.0, "runtime " + fmt(wall) + " s");

  const std::vector<std::string> expected = {
      "JoinTail subject=v2",   "JoinTail subject=v3",   "JoinTail subject=v4",   "JoinMiddle subject=v5",
      "AEBHead subject=v1",    "JoinTail subject=v2",   "JoinTail subject=v5",   "JoinTail subject=v3",
      "JoinTail subject=v4",   "CutIn subject=v2",      "AEBMiddle subject=v5",  "JoinTail subject=v5",
      "JoinTail subject=v3",   "JoinTail subject=v4",   "LeaveMiddle subject=v3", "LeaveTail subject=v4",
      "LeaveTail subject=v5",  "LeaveTail subject=v2",
  };
  std::vector<std::string> got;
  for (const auto& e : r.report.completions) {
    if (e.vehicle == V(1)) got.push_back(e.detail);
  }
  c.expect(got == expected, "leader completion sequence differs");
  if (got != expected) {
    std::string seq;
    for (const auto& g : got) seq += (seq.empty() ? "" : ", ") + g;
    c.info("got: " + seq);
  }
  c.info(std::to_string(got.size()) + " leader completions, runtime " + fmt(wall) + " s");
  return c.result(10, "integrated scenario");
}

CriterionResult determinism(const AcceptanceOptions& opt) {
  Check c;
  const char* names[] = {"steady",       "join_tail", "join_middle", "aeb_head", "aeb_middle", "cut_in",
                         "leave_middle", "leave_tail", "v2v_fault",  "radar_fault", "integrated"};
  for (const char* n : names) {
    const ScenarioSpec spec = load_bundled(opt, n);
    const RunResult a = run(spec);
    const RunResult b = run(spec);
    const bool same = trace_csv(a.trace) == trace_csv(b.trace) && replay_check(a.trace, b.trace).equal;
    c.expect(same, std::string(n) + " traces differ");
  }
  c.info(std::to_string(std::size(names)) + " scenarios replayed");
  return c.result(11, "determinism");
}

CriterionResult extendability() {
  Check c;
  StrategyRegistry registry;
  register_builtin_strategies(registry);
  const Maneuver split = Maneuver::extension("Split-stub");
  int calls = 0;
  registry.register_strategy({split, Role::Leader}, [&calls](const StrategyContext& ctx, StrategyProgress& p) {
    StrategyOutput out;
    out.use(Longitudinal::CC, ctx.params->speeds.platoon);
    if (++calls >= 3) {
      out.maneuver_done = true;
      p.enter(WaitState::Done, ctx.tick);
    }
    return out;
  });

  Parameters params;
  VehicleManager mgr(V(1), Role::Leader, PlatoonInfo::of({V(1), V(2)}), 20.0, registry, params);
  VehicleState ego;
  ego.id = V(1);
  ego.v = 20.0;
  CloudInstruction ins;
  ins.kind = CloudInstruction::Kind::Custom;
  ins.target = V(1);
  ins.leader = V(1);
  ins.maneuver = split;
  bool entered = false;
  bool completed = false;
  for (Tick t = 0; t < 5; ++t) {
    ManageInputs in;
    in.tick = t;
    in.ego = &ego;
    if (t == 0) in.instructions.push_back(ins);
    const ManageResult res = mgr.tick(in);
    entered = entered || mgr.maneuver() == split;
    for (const auto& e : res.events) completed = completed || (e.kind == "ManeuverComplete" && e.detail.find("Split-stub") != std::string::npos);
  }
  c.expect(entered, "extension maneuver never became active");
  c.expect(calls == 3, "extension strategy ran " + std::to_string(calls) + " times");
  c.expect(completed && mgr.maneuver().is_platooning(), "extension maneuver did not complete");
  c.info("Split-stub ran " + std::to_string(calls) + " ticks via the public registry");
  return c.result(12, "extendability");
}

CriterionResult fsm_closure() {
  Check c;
  std::vector<Maneuver> maneuvers;
  for (int k = 0; k <= static_cast<int>(ManeuverKind::Extension); ++k) maneuvers.push_back(Maneuver::of(static_cast<ManeuverKind>(k)));
  maneuvers.push_back(Maneuver::extension("Split-stub"));

  int defined = 0;
  int illegal = 0;
  for (const auto& m : maneuvers) {
    for (TriggerKind tk : kAllTriggerKinds) {
      for (const auto& payload : maneuvers) {
        const ManeuverTrigger trig{tk, payload};
        const auto next = next_maneuver(m, trig);
        try {
          const Maneuver got = maneuver_transition(m, trig);
          c.expect(next && *next == got, "maneuver_transition disagrees with next_maneuver");
          ++defined;
        } catch (const IllegalTransition&) {
          c.expect(!next, "IllegalTransition for a defined pair");
          ++illegal;
        } catch (...) {
          c.expect(false, "unexpected exception for " + to_string(m));
        }
      }
    }
  }
  for (Role r : kAllRoles) {
    for (RoleCause cause : kAllRoleCauses) {
      const auto next = next_role(r, cause);
      try {
        const Role got = role_transition(r, cause);
        c.expect(next && *next == got, "role_transition disagrees with next_role");
        ++defined;
      } catch (const IllegalTransition&) {
        c.expect(!next, "IllegalTransition for a defined role pair");
        ++illegal;
      } catch (...) {
        c.expect(false, "unexpected exception in role FSM");
      }
    }
  }
  c.info(std::to_string(defined) + " defined, " + std::to_string(illegal) + " illegal");
  return c.result(13, "FSM closure");
}

}  // namespace

ScenarioSpec load_bundled(const AcceptanceOptions& opt, const std::string& name) {
  ScenarioSpec spec = load_scenario(opt.scenario_dir + "/" + name + ".scenario");
  if (opt.gain_scale != 1.0) {
    auto& g = spec.params.gains;
    for (double* k : {&g.kp, &g.ki, &g.kd, &g.kv, &g.ka, &g.kc}) *k *= opt.gain_scale;
  }
  return spec;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  std::vector<CriterionResult> out;
  auto guarded = [&](int id, const std::string& name, const std::function<CriterionResult()>& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({id, name, false, std::string("error: ") + e.what()});
    }
  };
  guarded(1, "steady platooning", [&] { return steady(opt); });
  guarded(2, "join tail", [&] { return join_tail(opt); });
  guarded(3, "join middle", [&] { return join_middle(opt); });
  guarded(4, "AEB head", [&] { return aeb_head(opt); });
  guarded(5, "cut in", [&] { return cut_in(opt); });
  std::optional<FaultRuns> v2v;
  std::optional<FaultRuns> radar;
  guarded(6, "V2V fault, degradation on", [&] {
    v2v = fault_runs(opt, "v2v_fault");
    return v2v_fault_on(*v2v);
  });
  guarded(7, "V2V fault, degradation off", [&] {
    if (!v2v) v2v = fault_runs(opt, "v2v_fault");
    return v2v_fault_off(*v2v);
  });
  guarded(8, "radar fault, degradation on", [&] {
    radar = fault_runs(opt, "radar_fault");
    return radar_fault_on(*radar);
  });
  guarded(9, "radar fault, degradation off", [&] {
    if (!radar) radar = fault_runs(opt, "radar_fault");
    return radar_fault_off(*radar);
  });
  guarded(10, "integrated scenario", [&] { return integrated(opt); });
  guarded(11, "determinism", [&] { return determinism(opt); });
  guarded(12, "extendability", [] { return extendability(); });
  guarded(13, "FSM closure", [] { return fsm_closure(); });
  return out;
}

std::string format_results(const std::vector<CriterionResult>& results) {
  std::ostringstream o;
  for (const auto& r : results) {
    o << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << r.name;
    if (!r.detail.empty()) o << ": " << r.detail;
    o << '\n';
  }
  return o.str();
}

}  // namespace platoon
