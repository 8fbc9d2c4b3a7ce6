#include "patrol/verify.hpp"

#include <algorithm>
#include <cmath>

namespace patrol {

const char* epsilon_mode_name(EpsilonMode mode) {
  return mode == EpsilonMode::lemma3 ? "lemma3" : "experiment";
}

std::pair<std::int64_t, std::int64_t> EpsilonSpec::as_fraction() const {
  if (mode == EpsilonMode::experiment) return {quantum, w_min};
  if (!i_min) throw Error(Errc::missing_i_min, "lemma3 mode needs the minimum nonzero idleness");
  // (1/w + 2/i) * D = D * (i + 2w) / (w * i)
  return {quantum * (*i_min + 2 * w_min), w_min * *i_min};
}

double epsilon(const EpsilonSpec& spec) {
  const auto [num, den] = spec.as_fraction();
  return static_cast<double>(num) / static_cast<double>(den);
}

bool exact_bound_holds(Tick lhs_norm, Tick rhs_norm, const EpsilonSpec& eps) {
  const auto [num, den] = eps.as_fraction();
  // lhs <= (1 + num/den) * rhs  <=>  lhs * den <= rhs * (den + num)
  const __int128 lhs = static_cast<__int128>(lhs_norm) * den;
  const __int128 rhs = static_cast<__int128>(rhs_norm) * (den + num);
  return lhs <= rhs;
}

namespace {

constexpr double kRelTolerance = 1e-9;  // l2 costs only

bool bound_holds(const CostValue& lhs, const CostValue& rhs, const EpsilonSpec& eps) {
  if (lhs.exact_norm && rhs.exact_norm) {
    return exact_bound_holds(*lhs.exact_norm, *rhs.exact_norm, eps);
  }
  const double bound = rhs.value * (1.0 + epsilon(eps));
  return lhs.value <= bound * (1.0 + kRelTolerance);
}

BoundReport make_report(std::string quantity, const CostValue& lhs, const CostValue& source,
                        const EpsilonSpec& eps) {
  BoundReport report;
  report.quantity = std::move(quantity);
  report.lhs = lhs.value;
  report.epsilon_used = epsilon(eps);
  report.mode = eps.mode;
  report.rhs = source.value * (1.0 + report.epsilon_used);
  report.ratio = source.value > 0.0 ? lhs.value / source.value : (lhs.value > 0.0 ? HUGE_VAL : 1.0);
  report.pass = bound_holds(lhs, source, eps);
  return report;
}

}  // namespace

BoundReport verify_theorem1(const Environment& env, const PatrolStrategy& strat,
                            const DiscreteStrategy& disc, const CostSpec& spec,
                            const EpsilonSpec& eps, Window source_window,
                            Window discrete_window) {
  const CostValue source = cost(env, strat, spec, source_window);
  const CostValue discrete = cost(env, disc.base, spec, discrete_window);
  BoundReport report = make_report("J_piD <= (1+eps) J_pi", discrete, source, eps);
  report.source_window = source_window;
  report.discrete_window = discrete_window;
  return report;
}

std::vector<BoundReport> verify_corollary1(const Environment& env, const PatrolStrategy& strat,
                                           const DiscreteStrategy& disc, const EpsilonSpec& eps,
                                           Window source_window, Window discrete_window) {
  std::vector<BoundReport> reports;
  if (!env.has_deadlines()) return reports;

  const std::vector<Tick> source_peaks = peak_idleness(env, strat, source_window);
  const std::vector<Tick> discrete_peaks = peak_idleness(env, disc.base, discrete_window);
  const double eps_value = epsilon(eps);

  for (NodeIndex v = 0; v < env.node_count(); ++v) {
    const auto deadline = env.node(v).deadline;
    if (!deadline) continue;
    const Tick source_peak = source_peaks[static_cast<std::size_t>(v)];
    const Tick discrete_peak = discrete_peaks[static_cast<std::size_t>(v)];

    BoundReport report;
    report.quantity = "I_" + env.node(v).id + " <= (1+eps) T";
    report.mode = eps.mode;
    report.epsilon_used = eps_value;
    report.lhs = static_cast<double>(discrete_peak);
    report.rhs = (1.0 + eps_value) * static_cast<double>(*deadline);
    report.ratio = static_cast<double>(discrete_peak) / static_cast<double>(*deadline);
    report.source_window = source_window;
    report.discrete_window = discrete_window;
    if (source_peak > *deadline) {
      // The theorem presumes the source satisfies the deadline.
      report.pass = false;
      report.note = "source infeasible";
    } else {
      report.pass = exact_bound_holds(discrete_peak, *deadline, eps);
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<BoundReport> verify_theorem2(const Environment& env, const PatrolStrategy& strat,
                                         const DiscreteStrategy& disc,
                                         const RecurrentStrategy& rec, const CostSpec& spec,
                                         const EpsilonSpec& eps, Window source_window,
                                         Window discrete_window) {
  const CostValue source = cost(env, strat, spec, source_window);
  const CostValue discrete = cost(env, disc.base, spec, discrete_window);
  const CostValue recurrent = recurrent_cost(env, rec, spec);

  std::vector<BoundReport> reports;
  BoundReport main = make_report("J_piR <= (1+eps) J_pi", recurrent, source, eps);
  main.source_window = source_window;
  main.discrete_window = discrete_window;
  reports.push_back(std::move(main));

  // Intermediate step of the proof: the recurrent cost never exceeds the
  // discrete cost over the matching segment. Exact, no epsilon slack.
  BoundReport step;
  step.quantity = "J_piR <= J_piD";
  step.mode = eps.mode;
  step.epsilon_used = 0.0;
  step.lhs = recurrent.value;
  step.rhs = discrete.value;
  step.ratio = discrete.value > 0.0 ? recurrent.value / discrete.value : 1.0;
  step.discrete_window = discrete_window;
  if (recurrent.exact_norm && discrete.exact_norm) {
    step.pass = *recurrent.exact_norm <= *discrete.exact_norm;
  } else {
    step.pass = recurrent.value <= discrete.value * (1.0 + kRelTolerance);
  }
  reports.push_back(std::move(step));
  return reports;
}

std::vector<AuditViolation> lemma2_3_audit(const Environment& env, const PatrolStrategy& strat,
                                           const DiscreteStrategy& disc) {
  if (strat.events.size() != disc.base.events.size()) {
    throw Error(Errc::length_mismatch, "source and discrete event counts differ");
  }
  const Tick w_min = min_edge_weight(env);
  const Tick quantum = disc.quantum;
  std::vector<AuditViolation> violations;

  for (std::size_t i = 0; i < disc.audit.size(); ++i) {
    const ShiftAudit& audit = disc.audit[i];
    if (i > 0 && audit.d_bar < disc.audit[i - 1].d_bar) {
      violations.push_back(AuditViolation{kNoNode, i - 1, i, "d_bar decreased"});
    }
    if (!(audit.d > audit.d_bar - quantum)) {
      violations.push_back(
          AuditViolation{kNoNode, i, i, "shift fell more than D behind its running max"});
    }
  }

  // Per node, each consecutive-visit interval (m_h, n]: the shift growth is
  // bounded by (I_h / w_min + 2) * D with I_h the pre-reset source idleness
  // t^a(n) - t(m_h). Integer comparison:
  //   (d(n) - d(m_h)) * w_min <= (t^a(n) - t(m_h)) * D + 2 * D * w_min
  std::vector<std::size_t> last_visit(static_cast<std::size_t>(env.node_count()), SIZE_MAX);
  for (std::size_t n = 0; n < strat.events.size(); ++n) {
    const std::size_t v = static_cast<std::size_t>(strat.events[n].node);
    const std::size_t m = last_visit[v];
    if (m != SIZE_MAX) {
      const Tick delta_d = disc.audit[n].d - disc.audit[m].d;
      const Tick pre_reset = strat.events[n].arrival() - strat.events[m].t;
      const __int128 lhs = static_cast<__int128>(delta_d) * w_min;
      const __int128 rhs =
          static_cast<__int128>(pre_reset) * quantum + static_cast<__int128>(2) * quantum * w_min;
      if (lhs > rhs) {
        violations.push_back(AuditViolation{
            strat.events[n].node, m, n,
            "shift growth " + std::to_string(delta_d) + " exceeds the idleness-relative bound"});
      }
    }
    last_visit[v] = n;
  }
  return violations;
}

}  // namespace patrol
