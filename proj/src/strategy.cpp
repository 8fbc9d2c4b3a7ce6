#include "patrol/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace patrol {

using json = nlohmann::json;

std::vector<AgentPosition> StateSnapshot::sorted_positions() const {
  std::vector<AgentPosition> sorted = positions;
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

bool StateSnapshot::same_state(const StateSnapshot& other) const {
  return idleness == other.idleness && sorted_positions() == other.sorted_positions();
}

std::vector<Violation> validate(const Environment& env, const PatrolStrategy& strat) {
  std::vector<Violation> report;
  const std::size_t strategy_level = strat.events.size();
  const auto flag = [&report](std::size_t index, std::string what) {
    report.push_back(Violation{index, std::move(what)});
  };

  std::unordered_map<std::string, AgentIndex> agent_ids;
  for (std::size_t g = 0; g < strat.agents.size(); ++g) {
    const AgentSpec& agent = strat.agents[g];
    if (!agent_ids.emplace(agent.id, static_cast<AgentIndex>(g)).second) {
      flag(strategy_level, "duplicate agent id '" + agent.id + "'");
    }
    if (agent.start < 0 || agent.start >= env.node_count()) {
      flag(strategy_level, "agent '" + agent.id + "' has an invalid start node");
    }
  }

  std::vector<std::size_t> last_event(strat.agents.size(), SIZE_MAX);
  for (std::size_t i = 0; i < strat.events.size(); ++i) {
    const DepartureEvent& ev = strat.events[i];
    if (ev.agent < 0 || ev.agent >= strat.agent_count()) {
      flag(i, "unknown agent index");
      continue;
    }
    if (ev.node < 0 || ev.node >= env.node_count()) {
      flag(i, "unknown node index");
      continue;
    }
    if (ev.t < 0 || ev.r < 0) flag(i, "negative time or dwell");
    if (ev.t > strat.horizon) flag(i, "departure beyond the horizon");
    if (i == 0) {
      if (ev.t != 0) flag(i, "first departure must happen at time 0");
      if (ev.r != 0) flag(i, "first departure must have dwell 0");
    } else if (ev.t < strat.events[i - 1].t) {
      flag(i, "chronology: t=" + std::to_string(ev.t) + " precedes previous t=" +
                  std::to_string(strat.events[i - 1].t));
    }

    const std::size_t prev = last_event[static_cast<std::size_t>(ev.agent)];
    if (prev == SIZE_MAX) {
      const AgentSpec& agent = strat.agents[static_cast<std::size_t>(ev.agent)];
      if (ev.node != agent.start) {
        flag(i, "agent '" + agent.id + "' first departs from '" + env.node(ev.node).id +
                    "' instead of its start node");
      }
      if (ev.t != ev.r) {
        flag(i, "first departure of agent '" + agent.id +
                    "' must satisfy t = r (arrival at time 0)");
      }
    } else {
      const DepartureEvent& before = strat.events[prev];
      const auto weight = env.edge_weight(before.node, ev.node);
      if (!weight) {
        flag(i, "no edge " + env.node(before.node).id + " -> " + env.node(ev.node).id);
      } else if (ev.t != before.t + *weight + ev.r) {
        flag(i, "travel-time mismatch at event " + std::to_string(i) + ": expected t=" +
                    std::to_string(before.t + *weight + ev.r) + ", got t=" +
                    std::to_string(ev.t));
      }
    }
    last_event[static_cast<std::size_t>(ev.agent)] = i;
  }
  return report;
}

StrategyEvaluator::StrategyEvaluator(const Environment& env, const PatrolStrategy& strat)
    : env_(&env), strat_(&strat) {
  departures_.resize(static_cast<std::size_t>(env.node_count()));
  agent_events_.resize(strat.agents.size());
  arrivals_.reserve(strat.events.size());
  for (std::size_t i = 0; i < strat.events.size(); ++i) {
    const DepartureEvent& ev = strat.events[i];
    departures_[static_cast<std::size_t>(ev.node)].push_back(ev.t);
    agent_events_[static_cast<std::size_t>(ev.agent)].push_back(i);
    arrivals_.push_back(ev.arrival());
  }
  std::sort(arrivals_.begin(), arrivals_.end());
  arrivals_.erase(std::unique(arrivals_.begin(), arrivals_.end()), arrivals_.end());
}

void StrategyEvaluator::check_window(Tick t) const {
  if (t < 0 || t > strat_->horizon) {
    throw Error(Errc::out_of_window, "query time " + std::to_string(t) +
                                         " outside [0, " + std::to_string(strat_->horizon) + "]");
  }
}

std::vector<Tick> StrategyEvaluator::idleness_at(Tick t) const {
  check_window(t);
  std::vector<Tick> idle(static_cast<std::size_t>(env_->node_count()), t);
  for (std::size_t v = 0; v < departures_.size(); ++v) {
    const auto& deps = departures_[v];
    const auto it = std::upper_bound(deps.begin(), deps.end(), t);
    if (it != deps.begin()) idle[v] = t - *(it - 1);
  }
  // Dwell rule: arrival <= t <= departure pins the node to zero. Per agent,
  // at most one event interval can cover t.
  for (const auto& events : agent_events_) {
    const auto it = std::lower_bound(
        events.begin(), events.end(), t,
        [this](std::size_t i, Tick value) { return strat_->events[i].t < value; });
    if (it == events.end()) continue;
    const DepartureEvent& ev = strat_->events[*it];
    if (ev.arrival() <= t) idle[static_cast<std::size_t>(ev.node)] = 0;
  }
  return idle;
}

std::vector<Tick> StrategyEvaluator::idleness_left_limit(Tick t) const {
  check_window(t);
  std::vector<Tick> idle(static_cast<std::size_t>(env_->node_count()), t);
  for (std::size_t v = 0; v < departures_.size(); ++v) {
    const auto& deps = departures_[v];
    const auto it = std::lower_bound(deps.begin(), deps.end(), t);  // first >= t
    if (it != deps.begin()) idle[v] = t - *(it - 1);
  }
  // A reset happening exactly at t is ignored: only dwells entered strictly
  // before t count.
  for (const auto& events : agent_events_) {
    const auto it = std::lower_bound(
        events.begin(), events.end(), t,
        [this](std::size_t i, Tick value) { return strat_->events[i].t < value; });
    if (it == events.end()) continue;
    const DepartureEvent& ev = strat_->events[*it];
    if (ev.arrival() < t) idle[static_cast<std::size_t>(ev.node)] = 0;
  }
  return idle;
}

std::vector<AgentPosition> StrategyEvaluator::positions_at(Tick t) const {
  check_window(t);
  std::vector<AgentPosition> out;
  out.reserve(strat_->agents.size());
  for (std::size_t g = 0; g < strat_->agents.size(); ++g) {
    const auto& events = agent_events_[g];
    if (events.empty()) {
      out.push_back(AgentPosition::at_node(strat_->agents[g].start));
      continue;
    }
    const auto it = std::lower_bound(
        events.begin(), events.end(), t,
        [this](std::size_t i, Tick value) { return strat_->events[i].t < value; });
    if (it == events.end()) {
      // Past its final departure the truncated list says nothing more; the
      // agent counts as finished at that node.
      out.push_back(AgentPosition::at_node(strat_->events[events.back()].node));
      continue;
    }
    const DepartureEvent& next = strat_->events[*it];
    if (next.arrival() <= t) {
      out.push_back(AgentPosition::at_node(next.node));
      continue;
    }
    if (it == events.begin()) {
      out.push_back(AgentPosition::at_node(strat_->agents[g].start));
      continue;
    }
    const DepartureEvent& prev = strat_->events[*(it - 1)];
    out.push_back(AgentPosition::on_edge(prev.node, next.node, t - prev.t));
  }
  return out;
}

StateSnapshot StrategyEvaluator::snapshot_at(Tick t) const {
  return StateSnapshot{t, idleness_at(t), positions_at(t)};
}

std::vector<Tick> idleness_at(const Environment& env, const PatrolStrategy& strat, Tick t) {
  return StrategyEvaluator(env, strat).idleness_at(t);
}

std::vector<AgentPosition> positions_at(const Environment& env, const PatrolStrategy& strat,
                                        Tick t) {
  return StrategyEvaluator(env, strat).positions_at(t);
}

namespace {

// Forward sweep over the supremum candidates of a window: the left limit of
// every arrival instant in (begin, end], then the plain value at the window
// end. Visits candidates in ascending time with a reusable idleness buffer.
template <typename Visitor>
void sweep_candidates(const StrategyEvaluator& eval, Window window, Visitor&& visit) {
  const PatrolStrategy& strat = eval.strategy();
  const std::size_t node_count = static_cast<std::size_t>(eval.env().node_count());
  const std::vector<DepartureEvent>& events = strat.events;

  std::vector<Tick> last_departure(node_count, -1);
  std::vector<std::size_t> agent_cursor(strat.agents.size(), 0);
  std::vector<std::vector<std::size_t>> agent_events(strat.agents.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    agent_events[static_cast<std::size_t>(events[i].agent)].push_back(i);
  }

  std::size_t next_event = 0;
  std::vector<Tick> idle(node_count, 0);

  const auto evaluate = [&](Tick s, bool left_limit) {
    // Departures strictly before s for a left limit, at or before s otherwise.
    while (next_event < events.size() &&
           (left_limit ? events[next_event].t < s : events[next_event].t <= s)) {
      last_departure[static_cast<std::size_t>(events[next_event].node)] = events[next_event].t;
      ++next_event;
    }
    for (std::size_t v = 0; v < node_count; ++v) {
      idle[v] = last_departure[v] >= 0 ? s - last_departure[v] : s;
    }
    for (std::size_t g = 0; g < agent_events.size(); ++g) {
      auto& cursor = agent_cursor[g];
      const auto& own = agent_events[g];
      while (cursor < own.size() && events[own[cursor]].t < s) ++cursor;
      if (cursor == own.size()) continue;
      const DepartureEvent& ev = events[own[cursor]];
      const bool dwelling = left_limit ? ev.arrival() < s : ev.arrival() <= s;
      if (dwelling && ev.t >= s) idle[static_cast<std::size_t>(ev.node)] = 0;
    }
    visit(s, idle);
  };

  const std::vector<Tick>& arrivals = eval.arrival_instants();
  auto it = std::upper_bound(arrivals.begin(), arrivals.end(), window.begin);
  for (; it != arrivals.end() && *it <= window.end; ++it) evaluate(*it, true);
  evaluate(window.end, false);
}

double norm_of(const std::vector<Tick>& idle, const CostSpec& spec, const Environment& env,
               Tick* exact_out) {
  if (spec.exact()) {
    Tick value = 0;
    if (spec.norm == Norm::l1) {
      for (Tick entry : idle) value += entry;
    } else {
      for (Tick entry : idle) value = std::max(value, entry);
    }
    *exact_out = value;
    return static_cast<double>(value);
  }
  double value = 0.0;
  for (std::size_t v = 0; v < idle.size(); ++v) {
    const double weighted =
        spec.use_phi ? env.node(static_cast<NodeIndex>(v)).phi * static_cast<double>(idle[v])
                     : static_cast<double>(idle[v]);
    switch (spec.norm) {
      case Norm::l1: value += weighted; break;
      case Norm::linf: value = std::max(value, weighted); break;
      case Norm::l2: value += weighted * weighted; break;
    }
  }
  return spec.norm == Norm::l2 ? std::sqrt(value) : value;
}

void require_window(const StrategyEvaluator& eval, Window window) {
  if (window.begin > window.end) {
    throw Error(Errc::empty_window, "window [" + std::to_string(window.begin) + ", " +
                                        std::to_string(window.end) + "] is empty");
  }
  if (window.begin < 0 || window.end > eval.horizon()) {
    throw Error(Errc::out_of_window, "window exceeds [0, horizon]");
  }
}

}  // namespace

CostValue cost(const StrategyEvaluator& eval, const CostSpec& spec, Window window) {
  require_window(eval, window);
  Tick best_exact = 0;
  double best = 0.0;
  bool first = true;
  sweep_candidates(eval, window, [&](Tick, const std::vector<Tick>& idle) {
    Tick exact = 0;
    const double value = norm_of(idle, spec, eval.env(), &exact);
    if (first || (spec.exact() ? exact > best_exact : value > best)) {
      best = value;
      best_exact = exact;
      first = false;
    }
  });
  CostValue out;
  out.value = spec.scale * best;
  if (spec.exact()) out.exact_norm = best_exact;
  return out;
}

CostValue cost(const Environment& env, const PatrolStrategy& strat, const CostSpec& spec,
               Window window) {
  return cost(StrategyEvaluator(env, strat), spec, window);
}

std::vector<ConstraintViolation> check_constraints(const Environment& env,
                                                   const PatrolStrategy& strat, double slack,
                                                   Window window) {
  StrategyEvaluator eval(env, strat);
  require_window(eval, window);
  std::vector<NodeIndex> constrained;
  for (NodeIndex v = 0; v < env.node_count(); ++v) {
    if (env.node(v).deadline) constrained.push_back(v);
  }
  std::vector<ConstraintViolation> out;
  if (constrained.empty()) return out;
  sweep_candidates(eval, window, [&](Tick s, const std::vector<Tick>& idle) {
    for (NodeIndex v : constrained) {
      const double bound = slack * static_cast<double>(*env.node(v).deadline);
      const Tick value = idle[static_cast<std::size_t>(v)];
      if (static_cast<double>(value) > bound) {
        out.push_back(ConstraintViolation{v, s, value, bound});
      }
    }
  });
  return out;
}

std::vector<Tick> peak_idleness(const Environment& env, const PatrolStrategy& strat,
                                Window window) {
  StrategyEvaluator eval(env, strat);
  require_window(eval, window);
  std::vector<Tick> peak(static_cast<std::size_t>(env.node_count()), 0);
  sweep_candidates(eval, window, [&](Tick, const std::vector<Tick>& idle) {
    for (std::size_t v = 0; v < idle.size(); ++v) peak[v] = std::max(peak[v], idle[v]);
  });
  return peak;
}

std::vector<std::pair<Tick, double>> cost_series(const Environment& env,
                                                 const PatrolStrategy& strat,
                                                 const CostSpec& spec, Window window) {
  StrategyEvaluator eval(env, strat);
  require_window(eval, window);
  std::vector<std::pair<Tick, double>> series;
  sweep_candidates(eval, window, [&](Tick s, const std::vector<Tick>& idle) {
    Tick exact = 0;
    series.emplace_back(s, spec.scale * norm_of(idle, spec, env, &exact));
  });
  return series;
}

Tick min_nonzero_idleness(const Environment& env, const PatrolStrategy& strat, Window window) {
  StrategyEvaluator eval(env, strat);
  require_window(eval, window);
  const std::vector<Tick>& arrivals = eval.arrival_instants();
  std::optional<Tick> best;
  for (auto it = std::lower_bound(arrivals.begin(), arrivals.end(), window.begin);
       it != arrivals.end() && *it <= window.end; ++it) {
    for (Tick entry : eval.idleness_at(*it)) {
      if (entry > 0 && (!best || entry < *best)) best = entry;
    }
  }
  if (!best) {
    throw Error(Errc::no_nonzero_idleness,
                "no nonzero idleness entry at any arrival instant in the window");
  }
  return *best;
}

namespace {

json event_to_json(const Environment& env, const PatrolStrategy& strat,
                   const DepartureEvent& ev) {
  return json{{"t", ev.t},
              {"r", ev.r},
              {"v", env.node(ev.node).id},
              {"a", strat.agents[static_cast<std::size_t>(ev.agent)].id}};
}

}  // namespace

void save_strategy(const Environment& env, const PatrolStrategy& strat, std::ostream& out) {
  json header;
  header["agents"] = json::array();
  for (const AgentSpec& agent : strat.agents) {
    header["agents"].push_back(json{{"id", agent.id}, {"start", env.node(agent.start).id}});
  }
  header["D"] = strat.quantum ? json(*strat.quantum) : json(nullptr);
  header["horizon"] = strat.horizon;
  out << header.dump() << '\n';
  for (const DepartureEvent& ev : strat.events) {
    out << event_to_json(env, strat, ev).dump() << '\n';
  }
}

PatrolStrategy load_strategy(const Environment& env, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::parse_error, "empty strategy document");
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed strategy header: ") + e.what());
  }

  PatrolStrategy strat;
  std::unordered_map<std::string, AgentIndex> agent_index;
  for (const json& ja : header.at("agents")) {
    AgentSpec agent;
    agent.id = ja.at("id").get<std::string>();
    agent.start = env.require_node(ja.at("start").get<std::string>());
    if (!agent_index.emplace(agent.id, static_cast<AgentIndex>(strat.agents.size())).second) {
      throw Error(Errc::parse_error, "duplicate agent id '" + agent.id + "'");
    }
    strat.agents.push_back(std::move(agent));
  }
  if (!header.at("D").is_null()) strat.quantum = header.at("D").get<Tick>();
  strat.horizon = header.at("horizon").get<Tick>();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json je;
    try {
      je = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::parse_error, "malformed event on line " + std::to_string(line_no) +
                                         ": " + e.what());
    }
    DepartureEvent ev;
    ev.t = je.at("t").get<Tick>();
    ev.r = je.at("r").get<Tick>();
    ev.node = env.require_node(je.at("v").get<std::string>());
    const std::string agent_id = je.at("a").get<std::string>();
    const auto it = agent_index.find(agent_id);
    if (it == agent_index.end()) {
      throw Error(Errc::parse_error, "event on line " + std::to_string(line_no) +
                                         " names unknown agent '" + agent_id + "'");
    }
    ev.agent = it->second;
    strat.events.push_back(ev);
  }
  return strat;
}

PatrolStrategy load_strategy_file(const Environment& env, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open strategy file '" + path + "'");
  return load_strategy(env, in);
}

}  // namespace patrol
