#include "patrol/recurrence.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace patrol {

using json = nlohmann::json;

namespace {

// Largest event count usable for snapshot matching: instants past any
// agent's final departure (or past the last index with an event for every
// agent in scope) cannot be stitched, so the scan stops there. A pair (p, q)
// is stitchable only when every agent departs at least once in [p, q);
// without that, a dwelling or traveling agent would cross the whole segment
// and the repeated copy could not reproduce its motion.
std::vector<std::size_t> min_last_event_before(const PatrolStrategy& strat) {
  const std::size_t n = strat.events.size();
  std::vector<std::size_t> last(strat.agents.size(), SIZE_MAX);
  std::vector<std::size_t> min_last(n + 1, SIZE_MAX);
  for (std::size_t i = 0; i <= n; ++i) {
    std::size_t lowest = SIZE_MAX;
    for (std::size_t value : last) lowest = std::min(lowest, value);
    min_last[i] = lowest;
    if (i < n) last[static_cast<std::size_t>(strat.events[i].agent)] = i;
  }
  return min_last;
}

Tick scan_time_cap(const PatrolStrategy& strat) {
  std::vector<Tick> last(strat.agents.size(), -1);
  for (const DepartureEvent& ev : strat.events) {
    last[static_cast<std::size_t>(ev.agent)] = ev.t;
  }
  Tick cap = -1;
  for (Tick t : last) {
    if (t < 0) return -1;
    cap = cap < 0 ? t : std::min(cap, t);
  }
  return cap;
}

// Flat canonical form: idleness entries in node order, then the sorted
// position multiset encoded as (kind, from, to, elapsed) quadruples. Two
// snapshots satisfy C1 and C2 exactly when their keys are equal.
std::vector<Tick> canonical_key(const StateSnapshot& snapshot) {
  std::vector<Tick> key;
  key.reserve(snapshot.idleness.size() + 4 * snapshot.positions.size());
  key.insert(key.end(), snapshot.idleness.begin(), snapshot.idleness.end());
  for (const AgentPosition& pos : snapshot.sorted_positions()) {
    key.push_back(pos.at_node() ? 0 : 1);
    key.push_back(pos.from);
    key.push_back(pos.to);
    key.push_back(pos.elapsed);
  }
  return key;
}

struct KeyHash {
  std::size_t operator()(const std::vector<Tick>& key) const {
    std::size_t h = 1469598103934665603ull;
    for (Tick value : key) {
      h ^= static_cast<std::size_t>(value);
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

std::vector<StateSnapshot> departure_snapshots(const Environment& env,
                                               const DiscreteStrategy& disc) {
  const PatrolStrategy& strat = disc.base;
  const std::size_t node_count = static_cast<std::size_t>(env.node_count());
  const Tick cap = scan_time_cap(strat);

  std::vector<std::vector<std::size_t>> agent_events(strat.agents.size());
  for (std::size_t i = 0; i < strat.events.size(); ++i) {
    agent_events[static_cast<std::size_t>(strat.events[i].agent)].push_back(i);
  }

  std::vector<StateSnapshot> snapshots;
  std::vector<Tick> last_departure(node_count, -1);
  std::vector<std::size_t> agent_cursor(strat.agents.size(), 0);
  std::size_t applied = 0;

  for (std::size_t i = 0; i < strat.events.size(); ++i) {
    const Tick s = strat.events[i].t;
    if (cap < 0 || s > cap) break;

    while (applied < strat.events.size() && strat.events[applied].t <= s) {
      last_departure[static_cast<std::size_t>(strat.events[applied].node)] =
          strat.events[applied].t;
      ++applied;
    }

    StateSnapshot snap;
    snap.time = s;
    snap.idleness.resize(node_count);
    for (std::size_t v = 0; v < node_count; ++v) {
      snap.idleness[v] = last_departure[v] >= 0 ? s - last_departure[v] : s;
    }
    snap.positions.reserve(strat.agents.size());
    for (std::size_t g = 0; g < strat.agents.size(); ++g) {
      auto& cursor = agent_cursor[g];
      const auto& own = agent_events[g];
      while (cursor < own.size() && strat.events[own[cursor]].t < s) ++cursor;
      const DepartureEvent& next = strat.events[own[cursor]];
      if (next.arrival() <= s) {
        snap.idleness[static_cast<std::size_t>(next.node)] = 0;
        snap.positions.push_back(AgentPosition::at_node(next.node));
      } else {
        const DepartureEvent& prev = strat.events[own[cursor - 1]];
        snap.positions.push_back(AgentPosition::on_edge(prev.node, next.node, s - prev.t));
      }
    }
    snapshots.push_back(std::move(snap));
  }
  return snapshots;
}

std::optional<RecurrencePair> find_recurrence(const Environment& env,
                                              const DiscreteStrategy& disc) {
  const std::vector<StateSnapshot> snapshots = departure_snapshots(env, disc);
  const std::vector<std::size_t> min_last = min_last_event_before(disc.base);

  std::unordered_map<std::vector<Tick>, std::size_t, KeyHash> first_seen;
  for (std::size_t q = 0; q < snapshots.size(); ++q) {
    std::vector<Tick> key = canonical_key(snapshots[q]);
    const auto [it, inserted] = first_seen.try_emplace(std::move(key), q);
    if (inserted) continue;
    const std::size_t p = it->second;
    if (snapshots[p].time < snapshots[q].time && min_last[q] != SIZE_MAX && p <= min_last[q]) {
      return RecurrencePair{p, q};
    }
    // A same-time twin or an unstitchable segment: no later first occurrence
    // can do better for any later q, so keep the earliest.
  }
  return std::nullopt;
}

std::vector<AgentIndex> derive_chi(const StateSnapshot& at_p, const StateSnapshot& at_q) {
  if (at_p.positions.size() != at_q.positions.size()) {
    throw Error(Errc::no_bijection, "snapshots disagree on the number of agents");
  }
  const std::size_t count = at_p.positions.size();
  std::vector<AgentIndex> side_p(count), side_q(count);
  for (std::size_t g = 0; g < count; ++g) {
    side_p[g] = static_cast<AgentIndex>(g);
    side_q[g] = static_cast<AgentIndex>(g);
  }
  // Stable order: by position, agents sharing one matched in ascending
  // agent order on both sides (co-located homogeneous agents are
  // interchangeable).
  const auto by_position = [](const StateSnapshot& snap) {
    return [&snap](AgentIndex a, AgentIndex b) {
      const AgentPosition& pa = snap.positions[static_cast<std::size_t>(a)];
      const AgentPosition& pb = snap.positions[static_cast<std::size_t>(b)];
      return pa != pb ? pa < pb : a < b;
    };
  };
  std::sort(side_p.begin(), side_p.end(), by_position(at_p));
  std::sort(side_q.begin(), side_q.end(), by_position(at_q));

  std::vector<AgentIndex> chi(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (at_p.positions[static_cast<std::size_t>(side_p[k])] !=
        at_q.positions[static_cast<std::size_t>(side_q[k])]) {
      throw Error(Errc::no_bijection, "position multisets differ between the snapshots");
    }
    chi[static_cast<std::size_t>(side_p[k])] = side_q[k];
  }
  return chi;
}

RecurrentStrategy build_recurrent(const Environment& env, const DiscreteStrategy& disc,
                                  const RecurrencePair& pair) {
  const PatrolStrategy& strat = disc.base;
  if (pair.p >= pair.q || pair.q >= strat.events.size()) {
    throw Error(Errc::invalid_pair, "indices do not denote a segment");
  }
  StrategyEvaluator eval(env, strat);
  const Tick tau_p = strat.events[pair.p].t;
  const Tick tau_q = strat.events[pair.q].t;
  if (tau_p >= tau_q) throw Error(Errc::invalid_pair, "segment has zero duration");

  StateSnapshot at_p = eval.snapshot_at(tau_p);
  const StateSnapshot at_q = eval.snapshot_at(tau_q);
  if (!at_p.same_state(at_q)) {
    throw Error(Errc::invalid_pair, "snapshots at the segment boundaries differ");
  }

  RecurrentStrategy rec;
  rec.agents = strat.agents;
  rec.period = tau_q - tau_p;
  rec.quantum = disc.quantum;
  rec.chi = derive_chi(at_p, at_q);

  std::vector<bool> node_seen(static_cast<std::size_t>(env.node_count()), false);
  std::vector<bool> agent_seen(strat.agents.size(), false);
  for (std::size_t i = pair.p; i < pair.q; ++i) {
    DepartureEvent ev = strat.events[i];
    node_seen[static_cast<std::size_t>(ev.node)] = true;
    agent_seen[static_cast<std::size_t>(ev.agent)] = true;
    ev.t -= tau_p;
    rec.segment.push_back(ev);
  }
  if (!std::all_of(node_seen.begin(), node_seen.end(), [](bool b) { return b; })) {
    throw Error(Errc::invalid_pair, "some node is never visited inside the segment");
  }
  if (!std::all_of(agent_seen.begin(), agent_seen.end(), [](bool b) { return b; })) {
    throw Error(Errc::invalid_pair, "some agent never departs inside the segment");
  }

  at_p.time = 0;
  rec.start = std::move(at_p);
  return rec;
}

PatrolStrategy unroll(const Environment& env, const RecurrentStrategy& rec,
                      std::size_t k_periods) {
  if (k_periods < 1) throw Error(Errc::invalid_input, "need at least one period");
  const std::size_t n = rec.segment.size();

  PatrolStrategy strat;
  strat.agents = rec.agents;
  strat.quantum = rec.quantum;
  strat.horizon = rec.period * static_cast<Tick>(k_periods);
  strat.events.reserve(n * k_periods);

  // chi^period, advanced once per repetition.
  std::vector<AgentIndex> power(rec.agents.size());
  for (std::size_t g = 0; g < power.size(); ++g) power[g] = static_cast<AgentIndex>(g);

  for (std::size_t period = 0; period < k_periods; ++period) {
    const Tick offset = rec.period * static_cast<Tick>(period);
    for (std::size_t j = 0; j < n; ++j) {
      DepartureEvent ev = rec.segment[j];
      ev.t += offset;
      ev.agent = power[static_cast<std::size_t>(ev.agent)];
      strat.events.push_back(ev);
    }
    std::vector<AgentIndex> next(power.size());
    for (std::size_t g = 0; g < power.size(); ++g) {
      next[g] = rec.chi[static_cast<std::size_t>(power[g])];
    }
    power = std::move(next);
  }
  std::stable_sort(strat.events.begin(), strat.events.end(),
                   [](const DepartureEvent& a, const DepartureEvent& b) { return a.t < b.t; });

  // Re-derive dwells from departure gaps and edge weights. The first
  // departure of an agent claims arrival at time zero (t = r) and fixes its
  // start node; for interior events the gap minus the edge weight equals the
  // segment dwell, at a period boundary it realizes the stitched wait.
  std::vector<std::size_t> last_of_agent(strat.agents.size(), SIZE_MAX);
  for (std::size_t i = 0; i < strat.events.size(); ++i) {
    DepartureEvent& ev = strat.events[i];
    const std::size_t m = last_of_agent[static_cast<std::size_t>(ev.agent)];
    if (m == SIZE_MAX) {
      ev.r = ev.t;
      strat.agents[static_cast<std::size_t>(ev.agent)].start = ev.node;
    } else {
      const DepartureEvent& prev = strat.events[m];
      const auto weight = env.edge_weight(prev.node, ev.node);
      if (!weight || ev.t - prev.t - *weight < 0) {
        throw Error(Errc::invalid_pair, "segment does not stitch into a feasible walk");
      }
      ev.r = ev.t - prev.t - *weight;
    }
    last_of_agent[static_cast<std::size_t>(ev.agent)] = i;
  }
  return strat;
}

CostValue recurrent_cost(const Environment& env, const RecurrentStrategy& rec,
                         const CostSpec& spec) {
  PatrolStrategy two = unroll(env, rec, 2);
  return cost(env, two, spec, Window{rec.period, 2 * rec.period});
}

void save_recurrent(const Environment& env, const RecurrentStrategy& rec, std::ostream& out) {
  json doc;
  doc["period"] = rec.period;
  doc["D"] = rec.quantum;
  doc["chi"] = json::object();
  for (std::size_t g = 0; g < rec.chi.size(); ++g) {
    doc["chi"][rec.agents[g].id] = rec.agents[static_cast<std::size_t>(rec.chi[g])].id;
  }
  doc["start_positions"] = json::array();
  for (std::size_t g = 0; g < rec.agents.size(); ++g) {
    const AgentPosition& pos = rec.start.positions[g];
    json jp{{"agent", rec.agents[g].id}};
    if (pos.at_node()) {
      jp["node"] = env.node(pos.from).id;
    } else {
      jp["from"] = env.node(pos.from).id;
      jp["to"] = env.node(pos.to).id;
      jp["elapsed"] = pos.elapsed;
    }
    doc["start_positions"].push_back(std::move(jp));
  }
  doc["start_idleness"] = json::object();
  for (NodeIndex v = 0; v < env.node_count(); ++v) {
    doc["start_idleness"][env.node(v).id] = rec.start.idleness[static_cast<std::size_t>(v)];
  }
  doc["segment"] = json::array();
  for (const DepartureEvent& ev : rec.segment) {
    doc["segment"].push_back(json{{"t", ev.t},
                                  {"r", ev.r},
                                  {"v", env.node(ev.node).id},
                                  {"a", rec.agents[static_cast<std::size_t>(ev.agent)].id}});
  }
  out << doc.dump(2) << '\n';
}

RecurrentStrategy load_recurrent(const Environment& env, std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed recurrent document: ") + e.what());
  }

  RecurrentStrategy rec;
  rec.period = doc.at("period").get<Tick>();
  rec.quantum = doc.at("D").get<Tick>();

  std::unordered_map<std::string, AgentIndex> agent_index;
  rec.start.time = 0;
  for (const json& jp : doc.at("start_positions")) {
    const std::string id = jp.at("agent").get<std::string>();
    AgentPosition pos;
    if (jp.contains("node")) {
      pos = AgentPosition::at_node(env.require_node(jp.at("node").get<std::string>()));
    } else {
      pos = AgentPosition::on_edge(env.require_node(jp.at("from").get<std::string>()),
                                   env.require_node(jp.at("to").get<std::string>()),
                                   jp.at("elapsed").get<Tick>());
    }
    agent_index.emplace(id, static_cast<AgentIndex>(rec.agents.size()));
    rec.agents.push_back(AgentSpec{id, pos.at_node() ? pos.from : pos.to});
    rec.start.positions.push_back(pos);
  }

  rec.chi.resize(rec.agents.size());
  for (const auto& [from, to] : doc.at("chi").items()) {
    rec.chi[static_cast<std::size_t>(agent_index.at(from))] =
        agent_index.at(to.get<std::string>());
  }

  rec.start.idleness.assign(static_cast<std::size_t>(env.node_count()), 0);
  for (const auto& [node_id, value] : doc.at("start_idleness").items()) {
    rec.start.idleness[static_cast<std::size_t>(env.require_node(node_id))] = value.get<Tick>();
  }

  for (const json& je : doc.at("segment")) {
    DepartureEvent ev;
    ev.t = je.at("t").get<Tick>();
    ev.r = je.at("r").get<Tick>();
    ev.node = env.require_node(je.at("v").get<std::string>());
    ev.agent = agent_index.at(je.at("a").get<std::string>());
    rec.segment.push_back(ev);
  }
  return rec;
}

RecurrentStrategy load_recurrent_file(const Environment& env, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open recurrent file '" + path + "'");
  return load_recurrent(env, in);
}

}  // namespace patrol
