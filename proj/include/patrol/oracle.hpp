/*
 * Brute-force reference implementations, deliberately sharing no traversal
 * logic with the indexed engines they cross-check. O(T) per idleness query,
 * O(T^2) for the recurrence scan; correctness over speed. They live in the
 * library (not only in tests) so downstream users can run the same checks.
 */
#pragma once

#include <optional>
#include <vector>

#include "patrol/discretize.hpp"
#include "patrol/environment.hpp"
#include "patrol/recurrence.hpp"
#include "patrol/strategy.hpp"

namespace patrol {
namespace oracle {

// Full rescan of the event list per query; no indexing, no shared state.
std::vector<Tick> naive_idleness(const Environment& env, const PatrolStrategy& strat, Tick t);

std::vector<AgentPosition> naive_positions(const Environment& env, const PatrolStrategy& strat,
                                           Tick t);

// Snapshot per departure instant, each assembled from the naive queries.
// Applies the same every-agent-still-active cap as the engine.
std::vector<StateSnapshot> naive_departure_snapshots(const Environment& env,
                                                     const DiscreteStrategy& disc);

// The literal double loop: for q = 1.., for p = 0..q-1, return the first
// (p, q) whose snapshots match under C1 and C2, with tau(p) < tau(q) and
// every agent departing at least once in [p, q) (the same two truncation
// guards the engine applies; the event list is consulted only for them).
std::optional<RecurrencePair> quadratic_recurrence_scan(
    const std::vector<StateSnapshot>& snapshots, const PatrolStrategy& strat);

}  // namespace oracle
}  // namespace patrol
