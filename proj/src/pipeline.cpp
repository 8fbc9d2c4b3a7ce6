#include "patrol/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "patrol/discretize.hpp"
#include "patrol/environment.hpp"
#include "patrol/generator.hpp"
#include "patrol/oracle.hpp"
#include "patrol/recurrence.hpp"
#include "patrol/rng.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

EpsilonMode parse_mode(const std::string& name) {
  if (name == "lemma3") return EpsilonMode::lemma3;
  if (name == "experiment") return EpsilonMode::experiment;
  throw Error(Errc::parse_error, "epsilon mode must be 'lemma3' or 'experiment'");
}

CostSpec metric_spec(const std::string& name, NodeIndex node_count) {
  if (name == "gmi") return CostSpec::gmi();
  if (name == "gai") return CostSpec::gai(static_cast<std::size_t>(node_count));
  if (name == "wmax") return CostSpec::weighted_max();
  throw Error(Errc::invalid_input, "unknown metric '" + name + "'");
}

// Deterministic number formatting for the CSV outputs: integers plain, reals
// with six significant digits.
std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::abs(value) < 1e15) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.0f", value);
    return buffer;
  }
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

json report_to_json(const BoundReport& report) {
  json j{{"quantity", report.quantity},
         {"lhs", report.lhs},
         {"rhs", report.rhs},
         {"ratio", report.ratio},
         {"pass", report.pass},
         {"epsilon", report.epsilon_used},
         {"mode", epsilon_mode_name(report.mode)}};
  if (report.source_window) {
    j["source_window"] = {report.source_window->begin, report.source_window->end};
  }
  if (report.discrete_window) {
    j["discrete_window"] = {report.discrete_window->begin, report.discrete_window->end};
  }
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

struct ScenarioOutput {
  std::string results_rows;
  std::string ratio_rows;
  std::string timeseries_rows;
  json report = json::array();
  bool pass = true;
  bool cap_hit = false;
};

struct DRun {
  PatrolStrategy strategy;
  DiscreteStrategy discrete;
  RecurrentStrategy recurrent;
  RecurrencePair pair;
  Tick horizon_used = 0;
  int attempts = 0;
};

// One (agent count, D) leg: generate at the configured horizon, discretize,
// scan; on NotFound double the horizon (same seed, so the shorter run is a
// prefix) up to cap times the configured value.
std::optional<DRun> run_leg(const Environment& env, const ScenarioConfig& cfg,
                            const std::map<std::string, NodeIndex>& starts,
                            std::uint64_t gen_seed, Tick quantum) {
  DRun leg;
  Tick horizon = cfg.horizon;
  const Tick cap = cfg.horizon * static_cast<Tick>(cfg.horizon_cap_multiplier);
  while (true) {
    ++leg.attempts;
    GreedyRandomConfig gen;
    gen.gamma = cfg.gamma;
    gen.lambda = cfg.lambda;
    gen.seed = gen_seed;
    gen.horizon = horizon;
    gen.starts = starts;
    leg.strategy = greedy_random(env, gen);
    leg.discrete = discretize(env, leg.strategy, quantum);
    if (auto pair = find_recurrence(env, leg.discrete)) {
      leg.pair = *pair;
      leg.horizon_used = horizon;
      leg.recurrent = build_recurrent(env, leg.discrete, leg.pair);
      return leg;
    }
    if (horizon * 2 > cap) return std::nullopt;
    horizon *= 2;
  }
}

ScenarioOutput run_scenario(const Environment& env, const ScenarioConfig& cfg,
                            std::size_t scenario_index) {
  const int agent_count = cfg.agent_counts[scenario_index];
  const std::uint64_t scenario_seed = mix_seed(cfg.seed, scenario_index);
  ScenarioOutput out;

  std::map<std::string, NodeIndex> starts;
  if (!cfg.explicit_starts.empty()) {
    if (static_cast<int>(cfg.explicit_starts.size()) != agent_count) {
      throw Error(Errc::invalid_input, "explicit starts must match the agent count");
    }
    for (std::size_t g = 0; g < cfg.explicit_starts.size(); ++g) {
      starts["a" + std::to_string(g + 1)] = env.require_node(cfg.explicit_starts[g]);
    }
  } else {
    Rng placement(mix_seed(scenario_seed, 1));
    for (int g = 0; g < agent_count; ++g) {
      starts["a" + std::to_string(g + 1)] =
          static_cast<NodeIndex>(placement.uniform_int(0, env.node_count() - 1));
    }
  }
  const std::uint64_t gen_seed = mix_seed(scenario_seed, 2);
  const Tick w_min = min_edge_weight(env);

  for (Tick quantum : cfg.quanta) {
    json scenario_report{{"agents", agent_count}, {"D", quantum}};
    std::optional<DRun> leg;
    std::string failure;
    try {
      leg = run_leg(env, cfg, starts, gen_seed, quantum);
    } catch (const Error& e) {
      failure = e.what();
    }
    if (!leg) {
      out.pass = false;
      if (failure.empty()) {
        out.cap_hit = true;
        scenario_report["status"] = "recurrence_not_found";
      } else {
        scenario_report["status"] = failure;
      }
      for (const std::string& metric : cfg.metrics) {
        out.results_rows += cfg.layout_name + "," + std::to_string(agent_count) + "," +
                            std::to_string(quantum) + "," + metric + ",,,," +
                            epsilon_mode_name(cfg.epsilon_mode) + ",,,,fail\n";
      }
      out.report.push_back(std::move(scenario_report));
      continue;
    }

    const std::size_t p = leg->pair.p;
    const std::size_t q = leg->pair.q;
    const Window source_window{leg->strategy.events[p].t, leg->strategy.events[q].t};
    const Window discrete_window{leg->discrete.base.events[p].t, leg->discrete.base.events[q].t};

    EpsilonSpec eps;
    eps.quantum = quantum;
    eps.w_min = w_min;
    eps.mode = cfg.epsilon_mode;
    std::string eps_note;
    if (cfg.epsilon_mode == EpsilonMode::lemma3) {
      try {
        eps.i_min = min_nonzero_idleness(env, leg->strategy, source_window);
      } catch (const Error&) {
        // Degenerate all-zero case: fall back to the experiment coefficient.
        eps.mode = EpsilonMode::experiment;
        eps_note = "lemma3 epsilon degenerate; experiment mode used";
      }
    }
    const double eps_value = epsilon(eps);

    scenario_report["p"] = p;
    scenario_report["q"] = q;
    scenario_report["period"] = leg->recurrent.period;
    scenario_report["horizon_used"] = leg->horizon_used;
    scenario_report["attempts"] = leg->attempts;
    scenario_report["epsilon"] = eps_value;
    scenario_report["epsilon_mode"] = epsilon_mode_name(eps.mode);
    if (!eps_note.empty()) scenario_report["note"] = eps_note;
    scenario_report["checks"] = json::array();

    bool leg_pass = true;
    const auto push_check = [&](const BoundReport& report) {
      scenario_report["checks"].push_back(report_to_json(report));
      if (!report.pass) leg_pass = false;
    };

    // Structural checks once per leg.
    const auto disc_report = check_discretization(env, leg->strategy, leg->discrete);
    if (!disc_report.empty()) {
      leg_pass = false;
      scenario_report["discretization_violations"] = disc_report.size();
    }
    const auto audit = lemma2_3_audit(env, leg->strategy, leg->discrete);
    if (!audit.empty()) {
      leg_pass = false;
      scenario_report["audit_violations"] = audit.size();
    }
    for (const BoundReport& report :
         verify_corollary1(env, leg->strategy, leg->discrete, eps, source_window,
                           discrete_window)) {
      push_check(report);
    }

    for (const std::string& metric : cfg.metrics) {
      const CostSpec spec = metric_spec(metric, env.node_count());
      const CostValue j_pi = cost(env, leg->strategy, spec, source_window);
      const CostValue j_pid = cost(env, leg->discrete.base, spec, discrete_window);
      const CostValue j_pir = recurrent_cost(env, leg->recurrent, spec);

      const BoundReport theorem1 = verify_theorem1(env, leg->strategy, leg->discrete, spec, eps,
                                                   source_window, discrete_window);
      push_check(theorem1);
      for (const BoundReport& report :
           verify_theorem2(env, leg->strategy, leg->discrete, leg->recurrent, spec, eps,
                           source_window, discrete_window)) {
        push_check(report);
      }

      const double bound = (1.0 + eps_value) * j_pi.value;
      const double ratio = j_pi.value > 0.0 ? j_pir.value / j_pi.value : 1.0;
      bool row_pass = theorem1.pass;
      if (j_pir.exact_norm && j_pi.exact_norm) {
        row_pass = row_pass && exact_bound_holds(*j_pir.exact_norm, *j_pi.exact_norm, eps);
      } else {
        row_pass = row_pass && j_pir.value <= bound * (1.0 + 1e-9);
      }
      if (!row_pass) leg_pass = false;

      out.results_rows += cfg.layout_name + "," + std::to_string(agent_count) + "," +
                          std::to_string(quantum) + "," + metric + "," +
                          format_number(j_pi.value) + "," + format_number(j_pid.value) + "," +
                          format_number(j_pir.value) + "," + epsilon_mode_name(eps.mode) + "," +
                          format_number(eps_value) + "," + format_number(bound) + "," +
                          format_number(ratio) + "," + (row_pass ? "pass" : "fail") + "\n";
      out.ratio_rows += cfg.layout_name + "," + std::to_string(agent_count) + "," + metric +
                        "," + std::to_string(quantum) + "," + format_number(ratio) + "," +
                        format_number(1.0 + eps_value) + "\n";

      if (metric == "gmi") {
        for (const auto& [t, value] : cost_series(env, leg->strategy, spec, source_window)) {
          out.timeseries_rows += cfg.layout_name + "," + std::to_string(agent_count) + "," +
                                 std::to_string(quantum) + ",pi," + std::to_string(t) + "," +
                                 format_number(value) + "\n";
        }
        for (const auto& [t, value] :
             cost_series(env, leg->discrete.base, spec, discrete_window)) {
          out.timeseries_rows += cfg.layout_name + "," + std::to_string(agent_count) + "," +
                                 std::to_string(quantum) + ",piD," + std::to_string(t) + "," +
                                 format_number(value) + "\n";
        }
      }
    }

    scenario_report["status"] = leg_pass ? "ok" : "check_failed";
    if (!leg_pass) out.pass = false;
    out.report.push_back(std::move(scenario_report));
  }
  return out;
}

}  // namespace

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed config: ") + e.what());
  }

  ScenarioConfig cfg;
  cfg.environment_path = doc.at("environment").get<std::string>();
  if (doc.contains("agents")) {
    cfg.agent_counts.clear();
    if (doc.at("agents").is_array()) {
      for (const json& j : doc.at("agents")) cfg.agent_counts.push_back(j.get<int>());
    } else {
      cfg.agent_counts.push_back(doc.at("agents").get<int>());
    }
  }
  if (doc.contains("starts")) {
    for (const json& j : doc.at("starts")) cfg.explicit_starts.push_back(j.get<std::string>());
  }
  if (doc.contains("horizon")) cfg.horizon = doc.at("horizon").get<Tick>();
  if (doc.contains("D")) {
    cfg.quanta.clear();
    if (doc.at("D").is_array()) {
      for (const json& j : doc.at("D")) cfg.quanta.push_back(j.get<Tick>());
    } else {
      cfg.quanta.push_back(doc.at("D").get<Tick>());
    }
  }
  if (doc.contains("metrics")) {
    cfg.metrics.clear();
    for (const json& j : doc.at("metrics")) cfg.metrics.push_back(j.get<std::string>());
  }
  if (doc.contains("gamma")) cfg.gamma = doc.at("gamma").get<double>();
  if (doc.contains("lambda")) cfg.lambda = doc.at("lambda").get<double>();
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("epsilon_mode")) cfg.epsilon_mode = parse_mode(doc.at("epsilon_mode"));
  if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
  if (doc.contains("horizon_cap_multiplier")) {
    cfg.horizon_cap_multiplier = doc.at("horizon_cap_multiplier").get<int>();
  }
  if (doc.contains("layout")) cfg.layout_name = doc.at("layout").get<std::string>();
  return cfg;
}

PipelineResult run_pipeline(const ScenarioConfig& config) {
  ScenarioConfig cfg = config;
  for (int count : cfg.agent_counts) {
    if (count < 1) throw Error(Errc::invalid_input, "agent count must be at least 1");
  }
  for (Tick quantum : cfg.quanta) {
    if (quantum < 1) throw Error(Errc::invalid_d, "D values must be at least 1");
  }
  if (cfg.layout_name.empty()) {
    cfg.layout_name = fs::path(cfg.environment_path).stem().string();
  }

  const Environment env = load_environment_file(cfg.environment_path);
  fs::create_directories(cfg.output_dir);

  // One scenario (agent count) per worker; outputs are collected by index
  // and written in configuration order.
  std::vector<std::future<ScenarioOutput>> futures;
  futures.reserve(cfg.agent_counts.size());
  for (std::size_t s = 0; s < cfg.agent_counts.size(); ++s) {
    futures.push_back(std::async(std::launch::async,
                                 [&env, &cfg, s] { return run_scenario(env, cfg, s); }));
  }
  std::vector<ScenarioOutput> outputs;
  outputs.reserve(futures.size());
  for (auto& future : futures) outputs.push_back(future.get());

  PipelineResult result;
  result.all_pass = true;

  const fs::path dir(cfg.output_dir);
  {
    std::ofstream results(dir / "results.csv");
    results << "layout,agents,D,metric,J_pi,J_piD,J_piR,epsilon_mode,epsilon,bound,ratio,pass\n";
    for (const ScenarioOutput& out : outputs) results << out.results_rows;
  }
  {
    std::ofstream ratios(dir / "ratios_vs_D.csv");
    ratios << "layout,agents,metric,D,ratio,bound_ratio\n";
    for (const ScenarioOutput& out : outputs) ratios << out.ratio_rows;
  }
  {
    std::ofstream series(dir / "gmi_timeseries.csv");
    series << "layout,agents,D,series,t,gmi\n";
    for (const ScenarioOutput& out : outputs) series << out.timeseries_rows;
  }

  json report;
  report["layout"] = cfg.layout_name;
  report["seed"] = cfg.seed;
  report["epsilon_mode"] = epsilon_mode_name(cfg.epsilon_mode);
  report["horizon"] = cfg.horizon;
  report["scenarios"] = json::array();
  for (const ScenarioOutput& out : outputs) {
    for (const json& entry : out.report) report["scenarios"].push_back(entry);
    result.all_pass = result.all_pass && out.pass;
    result.recurrence_cap_hit = result.recurrence_cap_hit || out.cap_hit;
  }
  report["pass"] = result.all_pass;
  {
    std::ofstream report_file(dir / "report.json");
    report_file << report.dump(2) << '\n';
  }
  result.results_csv_path = (dir / "results.csv").string();
  return result;
}

}  // namespace patrol
