// Command-line front end for the patrol toolkit. Subcommands cover the
// individual pipeline stages (gen, disc, recur, eval, verify) plus the batch
// runner (run); each stage reads and writes the documented file formats so
// the stages compose through the shell.
//
// Exit codes: 0 success, 1 validation/check failure (error JSON on stderr),
// 2 usage error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "patrol/discretize.hpp"
#include "patrol/environment.hpp"
#include "patrol/generator.hpp"
#include "patrol/pipeline.hpp"
#include "patrol/recurrence.hpp"
#include "patrol/rng.hpp"
#include "patrol/strategy.hpp"
#include "patrol/verify.hpp"

namespace {

using patrol::Tick;
using json = nlohmann::json;

void fail(const patrol::Error& error) {
  std::cerr << json{{"error", patrol::errc_name(error.code())}, {"message", error.what()}}.dump()
            << std::endl;
  std::exit(1);
}

void fail_validation(const std::vector<patrol::Violation>& report) {
  json entries = json::array();
  for (const patrol::Violation& v : report) {
    entries.push_back(json{{"event", v.event_index}, {"message", v.what}});
  }
  std::cerr << json{{"error", "ValidationFailed"}, {"violations", entries}}.dump() << std::endl;
  std::exit(1);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw patrol::Error(patrol::Errc::io_error, "cannot write '" + path + "'");
  return out;
}

patrol::CostSpec spec_from_flags(const std::string& metric, const std::string& norm,
                                 bool use_phi, double scale, patrol::NodeIndex node_count) {
  if (!metric.empty()) {
    if (metric == "gmi") return patrol::CostSpec::gmi();
    if (metric == "gai") return patrol::CostSpec::gai(static_cast<std::size_t>(node_count));
    if (metric == "wmax") return patrol::CostSpec::weighted_max();
    throw patrol::Error(patrol::Errc::invalid_input, "unknown metric '" + metric + "'");
  }
  patrol::CostSpec spec;
  if (norm == "l1") spec.norm = patrol::Norm::l1;
  else if (norm == "l2") spec.norm = patrol::Norm::l2;
  else if (norm == "linf") spec.norm = patrol::Norm::linf;
  else throw patrol::Error(patrol::Errc::invalid_input, "unknown norm '" + norm + "'");
  spec.use_phi = use_phi;
  spec.scale = scale;
  return spec;
}

json bound_report_json(const patrol::BoundReport& report) {
  json j{{"quantity", report.quantity}, {"lhs", report.lhs},     {"rhs", report.rhs},
         {"ratio", report.ratio},       {"pass", report.pass},   {"epsilon", report.epsilon_used},
         {"mode", patrol::epsilon_mode_name(report.mode)}};
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-agent patrol strategy toolkit"};
  app.require_subcommand(1);

  // --- gen ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a greedy-random strategy");
  std::string gen_env, gen_out = "-";
  int gen_agents = 1;
  std::vector<std::string> gen_starts;
  Tick gen_horizon = 10000;
  double gen_gamma = 0.0001, gen_lambda = 1.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--env", gen_env, "environment JSON file")->required();
  gen->add_option("--agents", gen_agents, "number of agents (ids a1..aN)");
  gen->add_option("--starts", gen_starts,
                  "start node per agent (default: seeded random placement)");
  gen->add_option("--horizon", gen_horizon, "simulation horizon in ticks");
  gen->add_option("--gamma", gen_gamma, "delay probability per decision");
  gen->add_option("--lambda", gen_lambda, "rate of the exponential delay");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "output strategy file ('-' for stdout)");

  // --- disc --------------------------------------------------------------
  auto* disc_cmd = app.add_subcommand("disc", "discretize a strategy onto the D grid");
  std::string disc_env, disc_in, disc_out = "-", disc_audit;
  Tick disc_quantum = 0;
  disc_cmd->add_option("--env", disc_env, "environment JSON file")->required();
  disc_cmd->add_option("--in", disc_in, "input strategy file")->required();
  disc_cmd->add_option("--D", disc_quantum, "discretization constant (ticks)")
      ->required()
      ->check(CLI::PositiveNumber);
  disc_cmd->add_option("--out", disc_out, "output discrete strategy file");
  disc_cmd->add_option("--audit", disc_audit, "also write the shift audit trail CSV here");

  // --- recur -------------------------------------------------------------
  auto* recur = app.add_subcommand("recur", "extract a recurrent strategy");
  std::string recur_env, recur_in, recur_out = "-";
  recur->add_option("--env", recur_env, "environment JSON file")->required();
  recur->add_option("--in", recur_in, "input discrete strategy file")->required();
  recur->add_option("--out", recur_out, "output recurrent strategy JSON");

  // --- eval --------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a cost metric over a window");
  std::string eval_env, eval_in, eval_metric, eval_norm = "linf", eval_window;
  bool eval_phi = false;
  double eval_scale = 1.0;
  eval_cmd->add_option("--env", eval_env, "environment JSON file")->required();
  eval_cmd->add_option("--in", eval_in, "strategy file")->required();
  eval_cmd->add_option("--metric", eval_metric, "gmi | gai | wmax");
  eval_cmd->add_option("--norm", eval_norm, "l1 | l2 | linf (when no --metric)");
  eval_cmd->add_flag("--use-phi", eval_phi, "weight idleness by node phi");
  eval_cmd->add_option("--scale", eval_scale, "scalar C applied to the norm");
  eval_cmd->add_option("--window", eval_window, "a:b (default 0:horizon)");

  // --- verify ------------------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify", "check the approximation bounds");
  std::string ver_env, ver_strategy, ver_discrete, ver_recurrent, ver_mode = "experiment";
  std::string ver_out = "-";
  verify_cmd->add_option("--env", ver_env, "environment JSON file")->required();
  verify_cmd->add_option("--strategy", ver_strategy, "source strategy file")->required();
  verify_cmd->add_option("--discrete", ver_discrete, "discretized strategy file")->required();
  verify_cmd->add_option("--recurrent", ver_recurrent, "recurrent strategy JSON (optional)");
  verify_cmd->add_option("--mode", ver_mode, "epsilon mode: lemma3 | experiment");
  verify_cmd->add_option("--out", ver_out, "report JSON destination");

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run the full experiment pipeline");
  std::string run_config;
  std::string run_env, run_outdir, run_mode;
  std::vector<int> run_agents;
  std::vector<Tick> run_quanta;
  std::optional<std::uint64_t> run_seed;
  std::optional<Tick> run_horizon;
  run->add_option("--config", run_config, "scenario config JSON")->required();
  run->add_option("--env", run_env, "override: environment file");
  run->add_option("--outdir", run_outdir, "override: output directory");
  run->add_option("--agents", run_agents, "override: agent counts");
  run->add_option("--D", run_quanta, "override: D values");
  run->add_option("--seed", run_seed, "override: master seed");
  run->add_option("--horizon", run_horizon, "override: horizon");
  run->add_option("--mode", run_mode, "override: epsilon mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << (e.get_name() == "CallForHelp" ? "" : "usage error: ") << std::flush;
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const patrol::Environment env = patrol::load_environment_file(gen_env);
      patrol::GreedyRandomConfig cfg;
      cfg.gamma = gen_gamma;
      cfg.lambda = gen_lambda;
      cfg.seed = gen_seed;
      cfg.horizon = gen_horizon;
      if (!gen_starts.empty()) {
        for (std::size_t g = 0; g < gen_starts.size(); ++g) {
          cfg.starts["a" + std::to_string(g + 1)] = env.require_node(gen_starts[g]);
        }
      } else {
        patrol::Rng placement(patrol::mix_seed(gen_seed, 1));
        for (int g = 0; g < gen_agents; ++g) {
          cfg.starts["a" + std::to_string(g + 1)] =
              static_cast<patrol::NodeIndex>(placement.uniform_int(0, env.node_count() - 1));
        }
      }
      const patrol::PatrolStrategy strat = patrol::greedy_random(env, cfg);
      if (gen_out == "-") {
        patrol::save_strategy(env, strat, std::cout);
      } else {
        auto out = open_output(gen_out);
        patrol::save_strategy(env, strat, out);
      }
      return 0;
    }

    if (*disc_cmd) {
      const patrol::Environment env = patrol::load_environment_file(disc_env);
      const patrol::PatrolStrategy strat = patrol::load_strategy_file(env, disc_in);
      const auto report = patrol::validate(env, strat);
      if (!report.empty()) fail_validation(report);
      const patrol::DiscreteStrategy disc = patrol::discretize(env, strat, disc_quantum);
      if (disc_out == "-") {
        patrol::save_strategy(env, disc.base, std::cout);
      } else {
        auto out = open_output(disc_out);
        patrol::save_strategy(env, disc.base, out);
      }
      if (!disc_audit.empty()) {
        auto out = open_output(disc_audit);
        patrol::write_audit_csv(env, strat, disc, out);
      }
      return 0;
    }

    if (*recur) {
      const patrol::Environment env = patrol::load_environment_file(recur_env);
      const patrol::PatrolStrategy base = patrol::load_strategy_file(env, recur_in);
      if (!base.quantum) {
        throw patrol::Error(patrol::Errc::invalid_input,
                            "input strategy is not discrete (header D is null)");
      }
      patrol::DiscreteStrategy disc;
      disc.base = base;
      disc.quantum = *base.quantum;
      const auto pair = patrol::find_recurrence(env, disc);
      if (!pair) {
        throw patrol::Error(patrol::Errc::invalid_input,
                            "no recurrence within the horizon; extend it and rerun");
      }
      const patrol::RecurrentStrategy rec = patrol::build_recurrent(env, disc, *pair);
      if (recur_out == "-") {
        patrol::save_recurrent(env, rec, std::cout);
      } else {
        auto out = open_output(recur_out);
        patrol::save_recurrent(env, rec, out);
      }
      return 0;
    }

    if (*eval_cmd) {
      const patrol::Environment env = patrol::load_environment_file(eval_env);
      const patrol::PatrolStrategy strat = patrol::load_strategy_file(env, eval_in);
      const auto report = patrol::validate(env, strat);
      if (!report.empty()) fail_validation(report);
      const patrol::CostSpec spec =
          spec_from_flags(eval_metric, eval_norm, eval_phi, eval_scale, env.node_count());
      patrol::Window window{0, strat.horizon};
      if (!eval_window.empty()) {
        const auto colon = eval_window.find(':');
        if (colon == std::string::npos) {
          throw CLI::ValidationError("--window", "expected a:b");
        }
        window.begin = std::stoll(eval_window.substr(0, colon));
        window.end = std::stoll(eval_window.substr(colon + 1));
      }
      const patrol::CostValue value = patrol::cost(env, strat, spec, window);
      json out{{"value", value.value},
               {"window", {window.begin, window.end}},
               {"metric", eval_metric.empty() ? eval_norm : eval_metric}};
      if (value.exact_norm) out["norm"] = *value.exact_norm;
      std::cout << out.dump() << std::endl;
      return 0;
    }

    if (*verify_cmd) {
      const patrol::Environment env = patrol::load_environment_file(ver_env);
      const patrol::PatrolStrategy strat = patrol::load_strategy_file(env, ver_strategy);
      const auto strat_report = patrol::validate(env, strat);
      if (!strat_report.empty()) fail_validation(strat_report);
      const patrol::PatrolStrategy disc_base = patrol::load_strategy_file(env, ver_discrete);
      if (!disc_base.quantum) {
        throw patrol::Error(patrol::Errc::invalid_input, "discrete strategy header lacks D");
      }
      patrol::DiscreteStrategy disc;
      disc.quantum = *disc_base.quantum;
      disc.base = disc_base;
      // The audit trail is recoverable from the pair: d = tau - t.
      disc.audit.resize(disc.base.events.size());
      Tick running = 0;
      for (std::size_t i = 0; i < disc.base.events.size(); ++i) {
        if (i >= strat.events.size()) break;
        const Tick d = disc.base.events[i].t - strat.events[i].t;
        running = std::max(running, d);
        disc.audit[i] = patrol::ShiftAudit{d, running, i};
      }

      const auto structural = patrol::check_discretization(env, strat, disc);
      if (!structural.empty()) fail_validation(structural);

      const Tick w_min = patrol::min_edge_weight(env);
      patrol::EpsilonSpec eps;
      eps.quantum = disc.quantum;
      eps.w_min = w_min;
      eps.mode = ver_mode == "lemma3" ? patrol::EpsilonMode::lemma3
                                      : patrol::EpsilonMode::experiment;
      const Tick last_index = static_cast<Tick>(strat.events.size()) - 1;
      const patrol::Window source_window{0, strat.events[static_cast<std::size_t>(last_index)].t};
      const patrol::Window discrete_window{
          0, disc.base.events[static_cast<std::size_t>(last_index)].t};
      if (eps.mode == patrol::EpsilonMode::lemma3) {
        eps.i_min = patrol::min_nonzero_idleness(env, strat, source_window);
      }

      json checks = json::array();
      bool all_pass = true;
      const auto add = [&](const patrol::BoundReport& report) {
        checks.push_back(bound_report_json(report));
        all_pass = all_pass && report.pass;
      };
      add(patrol::verify_theorem1(env, strat, disc, patrol::CostSpec::gmi(), eps, source_window,
                                  discrete_window));
      add(patrol::verify_theorem1(env, strat, disc,
                                  patrol::CostSpec::gai(static_cast<std::size_t>(env.node_count())),
                                  eps, source_window, discrete_window));
      for (const auto& report :
           patrol::verify_corollary1(env, strat, disc, eps, source_window, discrete_window)) {
        add(report);
      }
      const auto audit = patrol::lemma2_3_audit(env, strat, disc);
      if (!audit.empty()) all_pass = false;
      if (!ver_recurrent.empty()) {
        const patrol::RecurrentStrategy rec = patrol::load_recurrent_file(env, ver_recurrent);
        for (const auto& report :
             patrol::verify_theorem2(env, strat, disc, rec, patrol::CostSpec::gmi(), eps,
                                     source_window, discrete_window)) {
          add(report);
        }
      }
      json out{{"checks", checks}, {"audit_violations", audit.size()}, {"pass", all_pass}};
      if (ver_out == "-") {
        std::cout << out.dump(2) << std::endl;
      } else {
        auto file = open_output(ver_out);
        file << out.dump(2) << '\n';
      }
      return all_pass ? 0 : 1;
    }

    if (*run) {
      patrol::ScenarioConfig cfg = patrol::load_scenario_config(run_config);
      if (!run_env.empty()) cfg.environment_path = run_env;
      if (!run_outdir.empty()) cfg.output_dir = run_outdir;
      if (!run_agents.empty()) cfg.agent_counts = run_agents;
      if (!run_quanta.empty()) cfg.quanta = run_quanta;
      if (run_seed) cfg.seed = *run_seed;
      if (run_horizon) cfg.horizon = *run_horizon;
      if (!run_mode.empty()) {
        cfg.epsilon_mode = run_mode == "lemma3" ? patrol::EpsilonMode::lemma3
                                                : patrol::EpsilonMode::experiment;
      }
      const patrol::PipelineResult result = patrol::run_pipeline(cfg);
      std::cout << json{{"pass", result.all_pass},
                        {"results", result.results_csv_path}}
                       .dump()
                << std::endl;
      return result.all_pass ? 0 : 1;
    }
  } catch (const patrol::Error& e) {
    fail(e);
  } catch (const CLI::ValidationError&) {
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
  return 2;
}
