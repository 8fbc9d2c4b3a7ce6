/*
 * Recurrent strategy synthesis: find two departure instants of a discrete
 * strategy with identical state snapshots (equal idleness vectors, C1, and
 * equal position multisets, C2), derive the agent bijection chi, and repeat
 * the segment between them forever.
 */
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patrol/discretize.hpp"
#include "patrol/environment.hpp"
#include "patrol/strategy.hpp"
#include "patrol/types.hpp"

namespace patrol {

struct RecurrencePair {
  std::size_t p = 0;  // 0-based event indices into the discrete event list
  std::size_t q = 0;
};

// Snapshots at the departure instants tau(i), one per event index, in index
// order. Restricted to instants no later than every agent's last departure:
// beyond that point the truncated event list no longer determines where an
// agent is heading, so a match there could not be stitched into a valid
// recurrent strategy. Same restriction applies to the oracle scan.
std::vector<StateSnapshot> departure_snapshots(const Environment& env,
                                               const DiscreteStrategy& disc);

// First pair in scan order (smallest q, then smallest p) with matching
// snapshots and tau(p) < tau(q); a zero-length period (simultaneous
// departures share a snapshot trivially) cannot seed a recurrence.
// Implemented with a first-occurrence index keyed by the canonicalized
// snapshot, which returns the identical pair to the quadratic scan.
std::optional<RecurrencePair> find_recurrence(const Environment& env,
                                              const DiscreteStrategy& disc);

// The bijection mapping each agent at snapshot p to the agent occupying the
// same position at snapshot q; agents sharing a position are matched in
// ascending agent order on both sides. Throws no_bijection if the position
// multisets differ.
std::vector<AgentIndex> derive_chi(const StateSnapshot& at_p, const StateSnapshot& at_q);

struct RecurrentStrategy {
  std::vector<AgentSpec> agents;
  std::vector<DepartureEvent> segment;  // times rebased so tau(p) = 0
  Tick period = 0;                      // L = tau(q) - tau(p)
  Tick quantum = 1;
  std::vector<AgentIndex> chi;          // chi[g] performs g's segment next period
  StateSnapshot start;                  // snapshot at the segment start
};

// Cuts events [p, q) out of the discrete strategy, rebases them to tau(p),
// and stores chi plus the boundary snapshot. Throws invalid_pair when the
// pair is not a genuine recurrence or some node is never visited inside the
// segment.
RecurrentStrategy build_recurrent(const Environment& env, const DiscreteStrategy& disc,
                                  const RecurrencePair& pair);

// Materializes k periods: event i of the infinite strategy has time
// theta(i) = seg_time(i mod n) + floor(i / n) * L, the segment's node, and
// agent chi^{floor(i/n)}(segment agent). Dwells are re-derived from the
// departure gaps and edge weights so the result satisfies every strategy
// invariant; for interior events this reproduces the segment dwells, at
// period boundaries it realizes the stitched wait.
PatrolStrategy unroll(const Environment& env, const RecurrentStrategy& rec,
                      std::size_t k_periods);

// Steady-state cost: the window [L, 2L] of unroll(rec, 2), which dominates
// every later window by periodicity and the zero-idleness start transient.
CostValue recurrent_cost(const Environment& env, const RecurrentStrategy& rec,
                         const CostSpec& spec);

// Recurrent-strategy document (JSON).
void save_recurrent(const Environment& env, const RecurrentStrategy& rec, std::ostream& out);
RecurrentStrategy load_recurrent(const Environment& env, std::istream& in);
RecurrentStrategy load_recurrent_file(const Environment& env, const std::string& path);

}  // namespace patrol
