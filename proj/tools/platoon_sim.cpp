// platoon_sim: run scenarios, compare degradation on/off, run acceptance.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "platoon/acceptance.hpp"
#include "platoon/engine.hpp"
#include "platoon/scenario.hpp"

using namespace platoon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpecError = 1;
constexpr int kExitCollision = 2;

struct RunFlags {
  std::string scenario;
  std::string out;
  bool no_degradation = false;
  std::optional<double> dt;
  std::optional<double> duration;
  bool halt = false;
};

ScenarioSpec load_with_flags(const RunFlags& f) {
  ScenarioSpec spec = load_scenario(f.scenario);
  if (f.no_degradation) spec.params.degradation_enabled = false;
  if (f.dt) {
    spec.run.dt = *f.dt;
    spec.params.dt = *f.dt;
  }
  if (f.duration) spec.run.duration = *f.duration;
  if (f.halt) spec.run.halt_on_collision = true;
  validate(spec);
  return spec;
}

int cmd_run(const RunFlags& f) {
  ScenarioSpec spec;
  try {
    spec = load_with_flags(f);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kExitSpecError;
  }
  const RunResult r = run(spec);
  write_outputs(f.out, r);
  std::cout << spec.name << ": " << r.report.ticks << " ticks, " << r.report.completions.size()
            << " maneuver completions, " << r.report.collisions.size() << " collisions\n";
  return r.report.collisions.empty() ? kExitOk : kExitCollision;
}

double min_of(const RunReport& r) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [_, g] : r.min_gap) m = std::min(m, g);
  return m;
}

int cmd_compare(const std::string& scenario, const std::string& out) {
  ScenarioSpec on;
  try {
    on = load_scenario(scenario);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kExitSpecError;
  }
  if (!on.has_fault()) {
    std::cerr << "NoFault: scenario has no fault event\n";
    return kExitSpecError;
  }
  on.params.degradation_enabled = true;
  ScenarioSpec off = on;
  off.params.degradation_enabled = false;

  auto a = std::async(std::launch::async, [&] { return run(on); });
  auto b = std::async(std::launch::async, [&] { return run(off); });
  const RunResult ron = a.get();
  const RunResult roff = b.get();

  const auto dir = std::filesystem::path(out);
  write_outputs((dir / "degradation_on").string(), ron);
  write_outputs((dir / "degradation_off").string(), roff);

  std::ostringstream s;
  s << std::fixed << std::setprecision(6);
  s << "pair,min_gap_on,min_gap_off\n";
  for (const auto& [pair, g] : ron.report.min_gap) {
    s << 'v' << pair.first.value << "-v" << pair.second.value << ',' << g << ',';
    if (auto it = roff.report.min_gap.find(pair); it != roff.report.min_gap.end()) s << it->second;
    s << '\n';
  }
  s << "collisions_on," << ron.report.collisions.size() << '\n';
  s << "collisions_off," << roff.report.collisions.size() << '\n';
  for (const auto& c : roff.report.collisions) {
    s << "collision_off,v" << c.a.value << "-v" << c.b.value << ',' << c.time << '\n';
  }
  std::ofstream(dir / "compare.csv") << s.str();
  std::cout << s.str();
  std::cout << "min gap on " << min_of(ron.report) << " m, off " << min_of(roff.report) << " m\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative platoon simulator"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("scenario", rf.scenario, "Scenario file")->required();
  run_cmd->add_option("--out", rf.out, "Output directory")->required();
  run_cmd->add_flag("--no-degradation", rf.no_degradation, "Disable functionality degradation");
  run_cmd->add_option("--dt", rf.dt, "Override time step, s");
  run_cmd->add_option("--duration", rf.duration, "Override duration, s");
  run_cmd->add_flag("--halt-on-collision", rf.halt, "Stop at the first collision");

  std::string cmp_file;
  std::string cmp_out;
  auto* cmp_cmd = app.add_subcommand("compare", "Run a fault scenario with and without degradation");
  cmp_cmd->add_option("scenario", cmp_file, "Scenario file")->required();
  cmp_cmd->add_option("--out", cmp_out, "Output directory")->required();

  AcceptanceOptions ao;
  auto* acc_cmd = app.add_subcommand("accept", "Run the acceptance scenarios");
  acc_cmd->add_option("--scenarios", ao.scenario_dir, "Directory with the bundled scenarios");
  acc_cmd->add_option("--gain-scale", ao.gain_scale, "Multiply all controller gains");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitSpecError;
  }

  try {
    if (*run_cmd) return cmd_run(rf);
    if (*cmp_cmd) return cmd_compare(cmp_file, cmp_out);
    if (*acc_cmd) {
      const auto results = run_acceptance(ao);
      std::cout << format_results(results);
      for (const auto& r : results) {
        if (!r.pass) return 1;
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSpecError;
  }
  return kExitOk;
}
