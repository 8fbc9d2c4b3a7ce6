/*
 * Approximation-bound verification: epsilon(D) in both of its published
 * forms, plus mechanical checks of the discretization and recurrence
 * guarantees on concrete (strategy, discrete, recurrent) triples.
 *
 * Bound comparisons stay in exact integer arithmetic whenever the cost does
 * (l1/linf without node weights); only l2 costs use a tolerance.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "patrol/discretize.hpp"
#include "patrol/environment.hpp"
#include "patrol/recurrence.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

enum class EpsilonMode { lemma3, experiment };

const char* epsilon_mode_name(EpsilonMode mode);

// lemma3:      epsilon = (1/w_min + 2/i_min) * D   (the proof's coefficient)
// experiment:  epsilon = D / w_min                 (the tables' coefficient)
struct EpsilonSpec {
  EpsilonMode mode = EpsilonMode::experiment;
  Tick quantum = 1;        // D
  Tick w_min = 1;
  std::optional<Tick> i_min;

  // epsilon as an exact rational numerator/denominator pair.
  std::pair<std::int64_t, std::int64_t> as_fraction() const;
};

double epsilon(const EpsilonSpec& spec);

struct BoundReport {
  std::string quantity;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;      // lhs / J_pi, the figure-3 ratio
  bool pass = false;
  double epsilon_used = 0.0;
  EpsilonMode mode = EpsilonMode::experiment;
  std::optional<Window> source_window;
  std::optional<Window> discrete_window;
  std::string note;
};

// J_piD <= (1 + eps) * J_pi; lhs over the discrete window, rhs over the
// corresponding source window (same event index range in each time scale).
BoundReport verify_theorem1(const Environment& env, const PatrolStrategy& strat,
                            const DiscreteStrategy& disc, const CostSpec& spec,
                            const EpsilonSpec& eps, Window source_window,
                            Window discrete_window);

// Per deadline-constrained node: peak discrete idleness <= (1 + eps) * T_k.
// Nodes whose deadline is already violated by the source strategy are
// flagged "source infeasible" instead of judged.
std::vector<BoundReport> verify_corollary1(const Environment& env,
                                           const PatrolStrategy& strat,
                                           const DiscreteStrategy& disc,
                                           const EpsilonSpec& eps, Window source_window,
                                           Window discrete_window);

// J_piR <= (1 + eps) * J_pi over the matched segment, and the intermediate
// J_piR <= J_piD from the proof; both reported.
std::vector<BoundReport> verify_theorem2(const Environment& env, const PatrolStrategy& strat,
                                         const DiscreteStrategy& disc,
                                         const RecurrentStrategy& rec, const CostSpec& spec,
                                         const EpsilonSpec& eps, Window source_window,
                                         Window discrete_window);

struct AuditViolation {
  NodeIndex node;
  std::size_t from_index;  // previous visit of the node
  std::size_t to_index;    // next visit
  std::string what;
};

// Per node and per consecutive-visit interval (m_h, n]:
//   d(n) - d(m_h) <= (I_h(t^a(n)) / w_min + 2) * D
// with I_h the pre-reset source idleness t^a(n) - t(m_h); plus d_bar
// monotonicity and d(i) > d_bar(i) - D pointwise. Exact integer checks.
std::vector<AuditViolation> lemma2_3_audit(const Environment& env, const PatrolStrategy& strat,
                                           const DiscreteStrategy& disc);

// Exact comparison lhs_norm <= (1 + eps) * rhs_norm for integer norms.
bool exact_bound_holds(Tick lhs_norm, Tick rhs_norm, const EpsilonSpec& eps);

}  // namespace patrol
