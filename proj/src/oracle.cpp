#include "patrol/oracle.hpp"

#include <algorithm>

namespace patrol {
namespace oracle {

std::vector<Tick> naive_idleness(const Environment& env, const PatrolStrategy& strat, Tick t) {
  const std::size_t node_count = static_cast<std::size_t>(env.node_count());
  std::vector<Tick> idle(node_count, 0);
  for (std::size_t v = 0; v < node_count; ++v) {
    Tick latest = -1;
    bool dwelling = false;
    for (const DepartureEvent& ev : strat.events) {
      if (ev.node != static_cast<NodeIndex>(v)) continue;
      if (ev.arrival() <= t && t <= ev.t) dwelling = true;
      if (ev.t <= t) latest = std::max(latest, ev.t);
    }
    idle[v] = dwelling ? 0 : (latest >= 0 ? t - latest : t);
  }
  return idle;
}

std::vector<AgentPosition> naive_positions(const Environment& env, const PatrolStrategy& strat,
                                           Tick t) {
  (void)env;
  std::vector<AgentPosition> out;
  for (std::size_t g = 0; g < strat.agents.size(); ++g) {
    const DepartureEvent* prev = nullptr;
    const DepartureEvent* next = nullptr;
    for (const DepartureEvent& ev : strat.events) {
      if (ev.agent != static_cast<AgentIndex>(g)) continue;
      if (ev.t < t) prev = &ev;
      if (ev.t >= t && next == nullptr) next = &ev;
    }
    if (next != nullptr && next->arrival() <= t) {
      out.push_back(AgentPosition::at_node(next->node));
    } else if (next == nullptr) {
      out.push_back(
          AgentPosition::at_node(prev ? prev->node : strat.agents[g].start));
    } else if (prev == nullptr) {
      out.push_back(AgentPosition::at_node(strat.agents[g].start));
    } else {
      out.push_back(AgentPosition::on_edge(prev->node, next->node, t - prev->t));
    }
  }
  return out;
}

std::vector<StateSnapshot> naive_departure_snapshots(const Environment& env,
                                                     const DiscreteStrategy& disc) {
  const PatrolStrategy& strat = disc.base;
  Tick cap = -1;
  for (std::size_t g = 0; g < strat.agents.size(); ++g) {
    Tick last = -1;
    for (const DepartureEvent& ev : strat.events) {
      if (ev.agent == static_cast<AgentIndex>(g)) last = std::max(last, ev.t);
    }
    if (last < 0) return {};
    cap = cap < 0 ? last : std::min(cap, last);
  }

  std::vector<StateSnapshot> snapshots;
  for (const DepartureEvent& ev : strat.events) {
    if (ev.t > cap) break;
    StateSnapshot snap;
    snap.time = ev.t;
    snap.idleness = naive_idleness(env, strat, ev.t);
    snap.positions = naive_positions(env, strat, ev.t);
    snapshots.push_back(std::move(snap));
  }
  return snapshots;
}

std::optional<RecurrencePair> quadratic_recurrence_scan(
    const std::vector<StateSnapshot>& snapshots, const PatrolStrategy& strat) {
  for (std::size_t q = 1; q < snapshots.size(); ++q) {
    for (std::size_t p = 0; p < q; ++p) {
      if (snapshots[p].time >= snapshots[q].time) continue;
      if (!snapshots[p].same_state(snapshots[q])) continue;
      bool stitchable = true;
      for (std::size_t g = 0; g < strat.agents.size() && stitchable; ++g) {
        bool departs = false;
        for (std::size_t i = p; i < q; ++i) {
          if (strat.events[i].agent == static_cast<AgentIndex>(g)) {
            departs = true;
            break;
          }
        }
        stitchable = departs;
      }
      if (stitchable) return RecurrencePair{p, q};
    }
  }
  return std::nullopt;
}

}  // namespace oracle
}  // namespace patrol
