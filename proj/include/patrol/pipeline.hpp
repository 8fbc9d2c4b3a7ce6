/*
 * Batch front-end: generate -> discretize -> find recurrence -> evaluate ->
 * verify -> report, for each (agent count, D) pair of a scenario config.
 * Scenarios run in parallel, one per worker; every output row is written in
 * deterministic order by the coordinator, so identical configs and seeds
 * produce byte-identical files.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "patrol/types.hpp"
#include "patrol/verify.hpp"

namespace patrol {

struct ScenarioConfig {
  std::string environment_path;
  std::vector<int> agent_counts = {1};
  std::vector<std::string> explicit_starts;  // empty: seeded random placement
  Tick horizon = 10000;
  std::vector<Tick> quanta = {1};            // D values
  std::vector<std::string> metrics = {"gmi", "gai"};
  double gamma = 0.0001;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  EpsilonMode epsilon_mode = EpsilonMode::experiment;
  std::string output_dir = ".";
  int horizon_cap_multiplier = 16;           // recurrence search doubles up to this
  std::string layout_name;                   // defaults to the environment file stem
};

ScenarioConfig load_scenario_config(const std::string& path);

struct PipelineResult {
  bool all_pass = false;
  bool recurrence_cap_hit = false;
  std::string results_csv_path;
};

// Writes results.csv, ratios_vs_D.csv, gmi_timeseries.csv and report.json
// into the output directory. Returns all_pass = false when any bound check
// fails or a recurrence search hits the horizon cap (partial rows are still
// written, marked as failed).
PipelineResult run_pipeline(const ScenarioConfig& config);

}  // namespace patrol
