/*
 * Discretization transform: shift every departure of a strategy onto the
 * grid of multiples of D while keeping the departure order and per-agent
 * travel-time consistency, recording the shift audit trail (d, d_bar).
 *
 * The transform is sequential in the event index (d_bar is a running
 * maximum); run one transform per thread.
 */
#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "patrol/environment.hpp"
#include "patrol/strategy.hpp"
#include "patrol/types.hpp"

namespace patrol {

struct ShiftAudit {
  Tick d = 0;      // tau(i) - t(i)
  Tick d_bar = 0;  // running max of d
  std::size_t source_index = 0;
};

struct DiscreteStrategy {
  PatrolStrategy base;  // events hold (tau, rho); base.quantum == quantum
  Tick quantum = 1;
  std::vector<ShiftAudit> audit;  // parallel to base.events
};

// Iterative update, one pass over the input events:
//   tau' = tau(m) + D * ceil((w_ab + r(n)) / D)
//   tau'' = max(tau(n-1), tau')
//   d' = tau'' - t(n)
//   d(n) = d' + D * floor(max(d_bar(n-1) - d', 0) / D)
//   d_bar(n) = max(d(n), d_bar(n-1))
//   tau(n) = t(n) + d(n)
//   rho(n) = d(n) - d(m) + r(n)
// where m is the same agent's previous event; an agent's first departure
// uses a virtual predecessor with tau = 0, d = 0, w = 0, so it rounds up to
// a multiple of D with no shift history.
DiscreteStrategy discretize(const Environment& env, const PatrolStrategy& strat, Tick quantum);

// Re-verifies every output invariant against the source: departure times on
// the D-grid, dwells never shortened, order preserved, d(i) > d_bar(i) - D,
// d(i) = tau(i) - t(i), and per-agent tau(n) = tau(m) + w_ab + rho(n).
// Throws length_mismatch when the event counts differ.
std::vector<Violation> check_discretization(const Environment& env,
                                            const PatrolStrategy& strat,
                                            const DiscreteStrategy& disc);

// Audit trail as CSV: index,t,tau,r,rho,d,d_bar,v,a
void write_audit_csv(const Environment& env, const PatrolStrategy& strat,
                     const DiscreteStrategy& disc, std::ostream& out);

}  // namespace patrol
