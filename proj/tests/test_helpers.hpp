// Shared fixtures for the unit tests: the small graphs and tours used by the
// hand-traced cases.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "patrol/environment.hpp"
#include "patrol/generator.hpp"
#include "patrol/rng.hpp"
#include "patrol/strategy.hpp"

namespace patrol_test {

inline patrol::Environment two_node_env(patrol::Tick weight = 3) {
  using patrol::NodeSpec;
  using patrol::RawEdge;
  return patrol::Environment::make(
      {NodeSpec{"v1", 1.0, std::nullopt}, NodeSpec{"v2", 1.0, std::nullopt}},
      {RawEdge{"v1", "v2", weight}, RawEdge{"v2", "v1", weight}});
}

inline patrol::Environment two_node_env_with_deadline(patrol::Tick weight,
                                                      patrol::Tick deadline_v1) {
  using patrol::NodeSpec;
  using patrol::RawEdge;
  return patrol::Environment::make(
      {NodeSpec{"v1", 1.0, deadline_v1}, NodeSpec{"v2", 1.0, std::nullopt}},
      {RawEdge{"v1", "v2", weight}, RawEdge{"v2", "v1", weight}});
}

// Single agent bouncing v1 -> v2 -> v1 ...; departure times 0, w, 2w, ...
inline patrol::PatrolStrategy bounce_tour(const patrol::Environment& env, patrol::Tick weight,
                                          int departures, patrol::Tick horizon) {
  patrol::PatrolStrategy strat;
  strat.agents = {patrol::AgentSpec{"a1", env.require_node("v1")}};
  strat.horizon = horizon;
  for (int i = 0; i < departures; ++i) {
    patrol::DepartureEvent ev;
    ev.t = weight * i;
    ev.r = 0;
    ev.node = env.require_node(i % 2 == 0 ? "v1" : "v2");
    ev.agent = 0;
    strat.events.push_back(ev);
  }
  return strat;
}

// Random scenario for property tests: synthetic graph + greedy-random run.
struct RandomScenario {
  patrol::Environment env;
  patrol::PatrolStrategy strategy;
};

inline RandomScenario random_scenario(std::uint64_t seed, int n_nodes, int agents,
                                      patrol::Tick horizon, double gamma = 0.0001,
                                      std::pair<patrol::Tick, patrol::Tick> weights = {1, 9}) {
  patrol::Rng rng(seed);
  const double degree =
      1.0 + (static_cast<double>(rng.next_u64() % 1000) / 1000.0) * 1.8;  // [1, 2.8)
  patrol::Environment env = patrol::random_environment(n_nodes, degree, weights, seed);
  patrol::GreedyRandomConfig cfg;
  cfg.gamma = gamma;
  cfg.lambda = 1.0;
  cfg.seed = seed ^ 0x5bd1e995u;
  cfg.horizon = horizon;
  for (int g = 0; g < agents; ++g) {
    cfg.starts["a" + std::to_string(g + 1)] =
        static_cast<patrol::NodeIndex>(rng.uniform_int(0, n_nodes - 1));
  }
  patrol::PatrolStrategy strategy = patrol::greedy_random(env, cfg);
  return RandomScenario{std::move(env), std::move(strategy)};
}

}  // namespace patrol_test
