/*
 * Greedy-Random strategy generator: each agent, on arrival, heads for the
 * out-neighbor with the highest current idleness; with probability gamma the
 * departure is delayed by round(1 + Exp(lambda)) ticks.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "patrol/environment.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

struct GreedyRandomConfig {
  double gamma = 0.0001;           // probability of a delayed departure
  double lambda = 1.0;             // rate of the exponential delay
  std::uint64_t seed = 0;
  Tick horizon = 0;
  std::map<std::string, NodeIndex> starts;  // agent id -> start node, in id order

  // RNG stream order, one decision at a time: if gamma > 0, one uniform draw;
  // if it fires (u <= gamma), one exponential draw. Initial departures at
  // t = 0 consume no randomness and always have dwell 0.
};

PatrolStrategy greedy_random(const Environment& env, const GreedyRandomConfig& cfg);

}  // namespace patrol
