#include "patrol/generator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "patrol/rng.hpp"

namespace patrol {

namespace {

struct AgentState {
  NodeIndex node = kNoNode;
  Tick arrival = 0;    // at the current node
  Tick departure = 0;  // scheduled; equals arrival until decided
};

// Arrival queue entry; ties resolve in agent order.
struct Pending {
  Tick time;
  AgentIndex agent;
  bool operator>(const Pending& other) const {
    return std::tie(time, agent) > std::tie(other.time, other.agent);
  }
};

}  // namespace

PatrolStrategy greedy_random(const Environment& env, const GreedyRandomConfig& cfg) {
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0) {
    throw Error(Errc::invalid_input, "gamma must lie in [0, 1]");
  }
  if (cfg.lambda <= 0.0) throw Error(Errc::invalid_input, "lambda must be positive");
  if (cfg.horizon <= 0) throw Error(Errc::invalid_input, "horizon must be positive");
  if (cfg.starts.empty()) throw Error(Errc::invalid_input, "no agents configured");

  PatrolStrategy strat;
  strat.horizon = cfg.horizon;
  for (const auto& [id, node] : cfg.starts) {
    if (node < 0 || node >= env.node_count()) {
      throw Error(Errc::invalid_input, "start node of agent '" + id + "' does not exist");
    }
    strat.agents.push_back(AgentSpec{id, node});
  }

  Rng rng(cfg.seed);
  const std::size_t node_count = static_cast<std::size_t>(env.node_count());

  // Completed departures per node (max departure time <= now) plus a queue of
  // scheduled ones, so idleness during another agent's dwell reads correctly.
  std::vector<Tick> completed(node_count, -1);
  std::vector<std::priority_queue<Tick, std::vector<Tick>, std::greater<>>> scheduled(node_count);
  std::vector<AgentState> agents(strat.agents.size());

  const auto idleness_of = [&](NodeIndex v, Tick now) -> Tick {
    auto& queue = scheduled[static_cast<std::size_t>(v)];
    while (!queue.empty() && queue.top() <= now) {
      completed[static_cast<std::size_t>(v)] =
          std::max(completed[static_cast<std::size_t>(v)], queue.top());
      queue.pop();
    }
    for (const AgentState& other : agents) {
      if (other.node == v && other.arrival <= now && now <= other.departure) return 0;
    }
    const Tick last = completed[static_cast<std::size_t>(v)];
    return last >= 0 ? now - last : now;
  };

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  for (std::size_t g = 0; g < strat.agents.size(); ++g) {
    agents[g].node = strat.agents[g].start;
    queue.push(Pending{0, static_cast<AgentIndex>(g)});
  }

  while (!queue.empty()) {
    const Pending pending = queue.top();
    queue.pop();
    const Tick now = pending.time;
    if (now >= cfg.horizon) continue;
    AgentState& self = agents[static_cast<std::size_t>(pending.agent)];
    self.node = self.node;  // arrival already recorded below on scheduling
    self.arrival = now;
    self.departure = now;

    const auto& neighbors = env.out_neighbors(self.node);
    if (neighbors.empty()) {
      throw Error(Errc::dead_end,
                  "node '" + env.node(self.node).id + "' has no out-neighbor");
    }

    // Highest current idleness wins; ties break toward the smaller node
    // index. The initial all-zero tie therefore picks the first neighbor.
    NodeIndex best = neighbors.front().first;
    Tick best_weight = neighbors.front().second;
    Tick best_idleness = idleness_of(best, now);
    for (std::size_t k = 1; k < neighbors.size(); ++k) {
      const Tick candidate = idleness_of(neighbors[k].first, now);
      if (candidate > best_idleness) {
        best = neighbors[k].first;
        best_weight = neighbors[k].second;
        best_idleness = candidate;
      }
    }

    // Initial departures leave immediately and draw nothing; afterwards one
    // uniform per decision, plus one exponential when the delay fires.
    Tick dwell = 0;
    if (now > 0 && cfg.gamma > 0.0) {
      if (rng.uniform01() <= cfg.gamma) {
        dwell = std::llround(1.0 + rng.exponential(cfg.lambda));
      }
    }

    const Tick departure = now + dwell;
    if (departure > cfg.horizon) continue;
    self.departure = departure;
    scheduled[static_cast<std::size_t>(self.node)].push(departure);
    strat.events.push_back(DepartureEvent{departure, dwell, self.node, pending.agent});

    self.node = best;
    self.arrival = departure + best_weight;
    queue.push(Pending{self.arrival, pending.agent});
  }

  // Dwellers can overtake zero-dwell departures decided later; restore
  // chronological order without disturbing equal-time decision order.
  std::stable_sort(strat.events.begin(), strat.events.end(),
                   [](const DepartureEvent& a, const DepartureEvent& b) { return a.t < b.t; });
  return strat;
}

}  // namespace patrol
