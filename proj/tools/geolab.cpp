// geolab <task> [mode] [--preset NAME | --config FILE] [--seed N] [--out DIR] [--jobs N]
//
// Exit codes: 0 success, 2 when a method reports failure (verification,
// no v0, ...), 1 for usage errors and internal failures.

#include <CLI11.hpp>

#include <algorithm>
#include <future>
#include <iostream>
#include <optional>

#include "geolab/scenario.hpp"

namespace sc = geolab::scenario;

int main(int argc, char** argv) {
  CLI::App app{"geolab: geodesics, convexity and cones on timelike graphs"};
  std::string task, mode, preset, config, out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool scan = false, list = false;

  app.add_option("task", task, "connect | convexify | cone | splitting | curvature | degree");
  app.add_option("mode", mode, "splitting chart: level | boost");
  auto* p = app.add_option("--preset", preset, "named scenario");
  app.add_option("--config", config, "scenario file or inline JSON")->excludes(p);
  app.add_option("--seed", seed, "override the scenario seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--jobs", jobs, "parallel scenarios (or restarts for a single connect)")->check(CLI::PositiveNumber);
  app.add_flag("--scan", scan, "splitting: run the hypothesis bound scan");
  app.add_flag("--list-presets", list, "print the preset table and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (list) {
    for (const sc::Preset& pr : sc::presets())
      std::cout << pr.name << '\t' << pr.config["task"].get<std::string>() << '\t' << pr.summary << '\n';
    return 0;
  }

  std::vector<sc::Scenario> scenarios;
  try {
    const auto& tasks = sc::task_names();
    if (std::find(tasks.begin(), tasks.end(), task) == tasks.end())
      throw geolab::SchemaError("unknown task '" + task + "'");
    if (!preset.empty()) {
      scenarios.push_back(sc::preset_scenario(preset));
    } else if (!config.empty()) {
      scenarios = sc::parse_config(config);
    } else {
      scenarios.push_back(sc::parse_scenario(sc::json{{"name", task}, {"task", task}}));
    }
    for (sc::Scenario& s : scenarios) {
      if (s.task != task)
        throw geolab::SchemaError("scenario '" + s.name + "' is a " + s.task + " task, not " + task);
      if (!mode.empty()) {
        if (task != "splitting" || (mode != "level" && mode != "boost"))
          throw geolab::SchemaError("unexpected argument '" + mode + "'");
        s.options["chart"] = mode;
      }
      if (scan) {
        if (task != "splitting") throw geolab::SchemaError("--scan applies to splitting only");
        s.options["scan"] = true;
      }
      if (seed) s.seed = *seed;
      if (!out.empty()) s.out_dir = out;
    }
  } catch (const geolab::Error& e) {
    std::cerr << "geolab: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  }

  std::vector<sc::RunResult> results(scenarios.size());
  if (scenarios.size() == 1) {
    results[0] = sc::run_scenario(scenarios[0], jobs);
  } else {
    for (std::size_t start = 0; start < scenarios.size(); start += jobs) {
      std::vector<std::future<sc::RunResult>> batch;
      for (std::size_t i = start; i < std::min(scenarios.size(), start + jobs); ++i)
        batch.push_back(std::async(std::launch::async, [&, i] { return sc::run_scenario(scenarios[i]); }));
      for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
    }
  }

  int code = 0;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const sc::RunResult& r = results[i];
    std::cout << scenarios[i].name << ": exit " << r.exit_code << '\n';
    for (const std::string& f : r.files) std::cout << "  " << f << '\n';
    if (r.report.contains("error")) std::cerr << scenarios[i].name << ": " << r.report["error"].dump() << '\n';
    if (r.exit_code == 1) code = 1;
    else if (r.exit_code == 2 && code == 0) code = 2;
  }
  return code;
}
