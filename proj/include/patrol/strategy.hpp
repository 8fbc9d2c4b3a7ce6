/*
 * Patrol strategies and the idleness evaluation engine.
 *
 * A strategy is a chronological list of departure events (t, r, v, a): agent
 * a departs node v at time t after dwelling for r, having arrived at t - r.
 * Idleness of a node is the time since its most recent departure, clamped to
 * zero while any agent dwells there; every entry is piecewise linear in t
 * with slope one between resets, which is what makes supremum evaluation at
 * arrival left-limits exact.
 *
 * All operations here are pure functions of immutable inputs.
 */
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patrol/environment.hpp"
#include "patrol/types.hpp"

namespace patrol {

struct DepartureEvent {
  Tick t = 0;        // departure time
  Tick r = 0;        // dwell duration; arrival = t - r
  NodeIndex node = kNoNode;
  AgentIndex agent = 0;

  Tick arrival() const { return t - r; }
};

struct AgentSpec {
  std::string id;
  NodeIndex start = kNoNode;
};

struct PatrolStrategy {
  std::vector<AgentSpec> agents;
  std::vector<DepartureEvent> events;  // chronological
  Tick horizon = 0;
  std::optional<Tick> quantum;         // D for discrete strategies, else null

  AgentIndex agent_count() const { return static_cast<AgentIndex>(agents.size()); }
};

struct Violation {
  std::size_t event_index;  // size() marks strategy-level problems
  std::string what;
};

// Empty report iff every strategy invariant holds against env: chronology,
// t(1)=0 and r(1)=0, per-agent first departure at the start node with t=r,
// and per-agent edge consistency t(n) = t(m) + w_ab + r(n).
std::vector<Violation> validate(const Environment& env, const PatrolStrategy& strat);

// Either at a node or strictly inside an edge (0 < elapsed < w); edge
// endpoints collapse to AtNode. Ordering: AtNode < OnEdge, then fieldwise.
struct AgentPosition {
  NodeIndex from = kNoNode;   // the node itself when at_node()
  NodeIndex to = kNoNode;     // kNoNode when at a node
  Tick elapsed = 0;

  static AgentPosition at_node(NodeIndex v) { return {v, kNoNode, 0}; }
  static AgentPosition on_edge(NodeIndex f, NodeIndex t, Tick e) { return {f, t, e}; }
  bool at_node() const { return to == kNoNode; }

  friend bool operator==(const AgentPosition&, const AgentPosition&) = default;
  friend auto operator<=>(const AgentPosition&, const AgentPosition&) = default;
};

// Idleness vector plus per-agent positions at one instant. The position
// multiset (sorted copy) is what conditions C1/C2 compare; agent labels are
// kept so the chi bijection can be derived.
struct StateSnapshot {
  Tick time = 0;
  std::vector<Tick> idleness;            // global node order
  std::vector<AgentPosition> positions;  // indexed by agent

  std::vector<AgentPosition> sorted_positions() const;
  bool same_state(const StateSnapshot& other) const;  // C1 and C2
};

enum class Norm { l1, l2, linf };

// f(t) = C * || Phi * I(t) ||_p. GMI and GAI are the two presets used by the
// experiment tables.
struct CostSpec {
  Norm norm = Norm::linf;
  bool use_phi = false;
  double scale = 1.0;

  static CostSpec gmi() { return {Norm::linf, false, 1.0}; }
  static CostSpec gai(std::size_t n_nodes) {
    return {Norm::l1, false, 1.0 / static_cast<double>(n_nodes)};
  }
  static CostSpec weighted_max() { return {Norm::linf, true, 1.0}; }

  // l1/linf without phi stay in integer arithmetic end to end.
  bool exact() const { return !use_phi && norm != Norm::l2; }
};

struct CostValue {
  double value = 0.0;                // C * norm
  std::optional<Tick> exact_norm;    // unscaled integer norm when spec.exact()
};

// Indexed evaluation engine: build once per strategy, query many times.
// Queries answer in O(|V| + |A| log T) against per-node departure lists and
// per-agent event ranges.
class StrategyEvaluator {
 public:
  StrategyEvaluator(const Environment& env, const PatrolStrategy& strat);

  const Environment& env() const { return *env_; }
  const PatrolStrategy& strategy() const { return *strat_; }

  // Value at t: zero while dwelling (arrival <= t <= departure), otherwise
  // t minus the latest departure at or before t, otherwise t.
  std::vector<Tick> idleness_at(Tick t) const;

  // Limit from below at t: the reset happening exactly at t is ignored, so a
  // node visited at t still shows the pre-reset value.
  std::vector<Tick> idleness_left_limit(Tick t) const;

  std::vector<AgentPosition> positions_at(Tick t) const;
  StateSnapshot snapshot_at(Tick t) const;

  // Distinct arrival instants, ascending.
  const std::vector<Tick>& arrival_instants() const { return arrivals_; }

  Tick horizon() const { return strat_->horizon; }

 private:
  void check_window(Tick t) const;

  const Environment* env_;
  const PatrolStrategy* strat_;
  std::vector<std::vector<Tick>> departures_;              // per node, sorted
  std::vector<std::vector<std::size_t>> agent_events_;     // per agent, event indices
  std::vector<Tick> arrivals_;
};

std::vector<Tick> idleness_at(const Environment& env, const PatrolStrategy& strat, Tick t);
std::vector<AgentPosition> positions_at(const Environment& env, const PatrolStrategy& strat, Tick t);

// Exact supremum of f over the closed window: f is evaluated at the left
// limit of every arrival instant inside the window plus the window end
// (between resets every idleness entry is non-decreasing, hence so is f).
CostValue cost(const Environment& env, const PatrolStrategy& strat, const CostSpec& spec,
               Window window);
CostValue cost(const StrategyEvaluator& eval, const CostSpec& spec, Window window);

struct ConstraintViolation {
  NodeIndex node;
  Tick time;        // instant whose left-limit (or window end) exceeded the bound
  Tick idleness;
  double bound;     // slack * T_k
};

// Peak idleness of every deadline-constrained node against slack * T_k.
std::vector<ConstraintViolation> check_constraints(const Environment& env,
                                                   const PatrolStrategy& strat,
                                                   double slack, Window window);

// Per-node supremum of idleness over the window, evaluated like cost().
std::vector<Tick> peak_idleness(const Environment& env, const PatrolStrategy& strat,
                                Window window);

// f sampled at the same candidate instants cost() maximizes over, in time
// order; the last sample is the window end.
std::vector<std::pair<Tick, double>> cost_series(const Environment& env,
                                                 const PatrolStrategy& strat,
                                                 const CostSpec& spec, Window window);

// I underbar: minimum non-zero idleness entry over all arrival instants in
// the window. Throws no_nonzero_idleness in the degenerate all-zero case.
Tick min_nonzero_idleness(const Environment& env, const PatrolStrategy& strat, Window window);

// Strategy document I/O: JSON-lines, header line then one event per line.
PatrolStrategy load_strategy(const Environment& env, std::istream& in);
PatrolStrategy load_strategy_file(const Environment& env, const std::string& path);
void save_strategy(const Environment& env, const PatrolStrategy& strat, std::ostream& out);

}  // namespace patrol
