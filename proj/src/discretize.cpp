#include "patrol/discretize.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace patrol {

namespace {

// Weight of the edge the agent of event n traversed to reach v(n); the
// virtual predecessor of an agent's first departure contributes w = 0.
Tick incoming_weight(const Environment& env, const PatrolStrategy& strat,
                     std::size_t prev_index, const DepartureEvent& ev) {
  if (prev_index == SIZE_MAX) return 0;
  const DepartureEvent& prev = strat.events[prev_index];
  const auto weight = env.edge_weight(prev.node, ev.node);
  if (!weight) {
    throw Error(Errc::invalid_input, "no edge between consecutive visits of agent " +
                                         strat.agents[static_cast<std::size_t>(ev.agent)].id);
  }
  return *weight;
}

}  // namespace

DiscreteStrategy discretize(const Environment& env, const PatrolStrategy& strat, Tick quantum) {
  if (quantum < 1) throw Error(Errc::invalid_d, "D must be a positive number of ticks");
  if (!validate(env, strat).empty()) {
    throw Error(Errc::invalid_input, "input strategy fails validation");
  }

  DiscreteStrategy disc;
  disc.quantum = quantum;
  disc.base.agents = strat.agents;
  disc.base.quantum = quantum;
  disc.base.events.reserve(strat.events.size());
  disc.audit.reserve(strat.events.size());

  // Last discrete event index per agent; SIZE_MAX selects the virtual
  // predecessor (tau = 0, d = 0, w = 0).
  std::vector<std::size_t> last_of_agent(strat.agents.size(), SIZE_MAX);
  Tick d_bar = 0;
  Tick prev_tau = 0;

  for (std::size_t n = 0; n < strat.events.size(); ++n) {
    const DepartureEvent& src = strat.events[n];
    const std::size_t m = last_of_agent[static_cast<std::size_t>(src.agent)];
    const Tick tau_m = m == SIZE_MAX ? 0 : disc.base.events[m].t;
    const Tick d_m = m == SIZE_MAX ? 0 : disc.audit[m].d;
    const Tick w = incoming_weight(env, strat, m, src);

    Tick d = 0;
    if (n == 0) {
      // tau(1) = rho(1) = d(1) = d_bar(1) = 0; the input guarantees
      // t(1) = 0, r(1) = 0.
      d = 0;
    } else {
      const Tick tau_prime = tau_m + quantum * ceil_div(w + src.r, quantum);
      const Tick tau_second = std::max(prev_tau, tau_prime);
      const Tick d_prime = tau_second - src.t;
      d = d_prime + quantum * (std::max<Tick>(d_bar - d_prime, 0) / quantum);
    }

    DepartureEvent ev;
    ev.t = src.t + d;
    ev.r = d - d_m + src.r;
    ev.node = src.node;
    ev.agent = src.agent;

    d_bar = std::max(d, d_bar);
    prev_tau = ev.t;
    last_of_agent[static_cast<std::size_t>(src.agent)] = n;
    disc.base.events.push_back(ev);
    disc.audit.push_back(ShiftAudit{d, d_bar, n});
  }

  disc.base.horizon = strat.horizon;
  if (!disc.base.events.empty()) {
    disc.base.horizon = std::max(disc.base.horizon, disc.base.events.back().t);
  }
  return disc;
}

std::vector<Violation> check_discretization(const Environment& env, const PatrolStrategy& strat,
                                            const DiscreteStrategy& disc) {
  if (strat.events.size() != disc.base.events.size() ||
      disc.base.events.size() != disc.audit.size()) {
    throw Error(Errc::length_mismatch, "source and discrete event counts differ");
  }
  const Tick quantum = disc.quantum;
  std::vector<Violation> report;
  const auto flag = [&report](std::size_t index, std::string what) {
    report.push_back(Violation{index, std::move(what)});
  };

  std::vector<std::size_t> last_of_agent(strat.agents.size(), SIZE_MAX);
  for (std::size_t i = 0; i < disc.base.events.size(); ++i) {
    const DepartureEvent& src = strat.events[i];
    const DepartureEvent& ev = disc.base.events[i];
    const ShiftAudit& audit = disc.audit[i];

    if (ev.node != src.node || ev.agent != src.agent) {
      flag(i, "visit sequence differs from the source strategy");
      continue;
    }
    if (ev.t % quantum != 0) {
      flag(i, "departure time " + std::to_string(ev.t) + " is not a multiple of D");
    }
    if (ev.r < src.r) {
      flag(i, "dwell shortened: rho=" + std::to_string(ev.r) + " < r=" + std::to_string(src.r));
    }
    if (audit.d != ev.t - src.t) {
      flag(i, "audit shift d does not equal tau - t");
    }
    if (i > 0) {
      if (ev.t < disc.base.events[i - 1].t) flag(i, "discrete departures out of order");
      const Tick prev_bar = disc.audit[i - 1].d_bar;
      if (audit.d_bar != std::max(audit.d, prev_bar)) flag(i, "d_bar is not the running max");
      if (!(audit.d > audit.d_bar - quantum)) {
        flag(i, "shift fell more than D behind its running max");
      }
    } else {
      if (ev.t != 0 || ev.r != 0 || audit.d != 0 || audit.d_bar != 0) {
        flag(i, "first discrete departure must be the zero instance");
      }
    }

    const std::size_t m = last_of_agent[static_cast<std::size_t>(ev.agent)];
    if (m == SIZE_MAX) {
      if (ev.t != ev.r) flag(i, "agent's first discrete departure must satisfy tau = rho");
    } else {
      const auto weight = env.edge_weight(disc.base.events[m].node, ev.node);
      if (!weight) {
        flag(i, "no edge between consecutive visits");
      } else if (ev.t != disc.base.events[m].t + *weight + ev.r) {
        flag(i, "travel-time mismatch: expected tau=" +
                    std::to_string(disc.base.events[m].t + *weight + ev.r) + ", got tau=" +
                    std::to_string(ev.t));
      }
    }
    last_of_agent[static_cast<std::size_t>(ev.agent)] = i;
  }
  return report;
}

void write_audit_csv(const Environment& env, const PatrolStrategy& strat,
                     const DiscreteStrategy& disc, std::ostream& out) {
  out << "index,t,tau,r,rho,d,d_bar,v,a\n";
  for (std::size_t i = 0; i < disc.base.events.size(); ++i) {
    const DepartureEvent& src = strat.events[i];
    const DepartureEvent& ev = disc.base.events[i];
    const ShiftAudit& audit = disc.audit[i];
    out << i << ',' << src.t << ',' << ev.t << ',' << src.r << ',' << ev.r << ',' << audit.d
        << ',' << audit.d_bar << ',' << env.node(ev.node).id << ','
        << strat.agents[static_cast<std::size_t>(ev.agent)].id << '\n';
  }
}

}  // namespace patrol
