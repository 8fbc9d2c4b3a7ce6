#include <doctest.h>

#include <sstream>

#include "patrol/discretize.hpp"
#include "patrol/oracle.hpp"
#include "patrol/recurrence.hpp"
#include "test_helpers.hpp"

using namespace patrol;
using patrol_test::bounce_tour;
using patrol_test::two_node_env;

namespace {

DiscreteStrategy golden_unit_tour(const Environment& env, int departures) {
  const PatrolStrategy strat = bounce_tour(env, 1, departures, departures - 1);
  return discretize(env, strat, 1);
}

struct FoundRecurrence {
  Environment env;
  DiscreteStrategy disc;
  RecurrencePair pair;
};

// Deterministic greedy runs on small graphs cycle quickly; scan a few seeds
// until one recurs inside the horizon.
std::optional<FoundRecurrence> find_random_recurrence(std::uint64_t seed) {
  auto scenario = patrol_test::random_scenario(seed, 3 + seed % 4, 1 + seed % 2, 500, 0.0);
  const Tick quantum = 1 + static_cast<Tick>(seed % 3);
  DiscreteStrategy disc = discretize(scenario.env, scenario.strategy, quantum);
  const auto pair = find_recurrence(scenario.env, disc);
  if (!pair) return std::nullopt;
  return FoundRecurrence{std::move(scenario.env), std::move(disc), *pair};
}

}  // namespace

TEST_CASE("golden unit tour: pair, period, segment, chi, costs") {
  const Environment env = two_node_env(1);
  const DiscreteStrategy disc = golden_unit_tour(env, 4);  // tau = 0,1,2,3

  const auto pair = find_recurrence(env, disc);
  REQUIRE(pair.has_value());
  CHECK(pair->p == 1);  // instants tau=1 and tau=3 (instances 2 and 4)
  CHECK(pair->q == 3);

  const RecurrentStrategy rec = build_recurrent(env, disc, *pair);
  CHECK(rec.period == 2);
  REQUIRE(rec.segment.size() == 2);
  CHECK(rec.segment[0].t == 0);
  CHECK(rec.segment[0].node == env.require_node("v2"));
  CHECK(rec.segment[1].t == 1);
  CHECK(rec.segment[1].node == env.require_node("v1"));
  REQUIRE(rec.chi.size() == 1);
  CHECK(rec.chi[0] == 0);

  CHECK(recurrent_cost(env, rec, CostSpec::gmi()).value == doctest::Approx(2.0));
  CHECK(recurrent_cost(env, rec, CostSpec::gai(2)).value == doctest::Approx(1.5));
}

TEST_CASE("golden unit tour: unroll") {
  const Environment env = two_node_env(1);
  const DiscreteStrategy disc = golden_unit_tour(env, 4);
  const RecurrentStrategy rec = build_recurrent(env, disc, *find_recurrence(env, disc));

  const PatrolStrategy k3 = unroll(env, rec, 3);
  REQUIRE(k3.events.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(k3.events[i].t == static_cast<Tick>(i));
  CHECK(k3.horizon == 6);
  CHECK(validate(env, k3).empty());

  const PatrolStrategy k1 = unroll(env, rec, 1);
  REQUIRE(k1.events.size() == rec.segment.size());
  CHECK(k1.events[0].node == rec.segment[0].node);

  CHECK(validate(env, unroll(env, rec, 5)).empty());
}

TEST_CASE("pre-periodic prefix alone yields no recurrence") {
  const Environment env = two_node_env(1);
  const DiscreteStrategy disc = golden_unit_tour(env, 3);  // tau = 0,1,2: all distinct states
  CHECK(!find_recurrence(env, disc).has_value());
}

TEST_CASE("symmetric two-agent cycle recurs with chi swapping the agents") {
  const Environment env = two_node_env(1);
  PatrolStrategy strat;
  strat.agents = {AgentSpec{"a1", env.require_node("v1")},
                  AgentSpec{"a2", env.require_node("v2")}};
  strat.horizon = 4;
  const NodeIndex v1 = env.require_node("v1");
  const NodeIndex v2 = env.require_node("v2");
  for (Tick t = 0; t <= 4; ++t) {
    strat.events.push_back(DepartureEvent{t, 0, t % 2 == 0 ? v1 : v2, 0});
    strat.events.push_back(DepartureEvent{t, 0, t % 2 == 0 ? v2 : v1, 1});
  }
  REQUIRE(validate(env, strat).empty());
  const DiscreteStrategy disc = discretize(env, strat, 1);

  const auto pair = find_recurrence(env, disc);
  REQUIRE(pair.has_value());
  const RecurrentStrategy rec = build_recurrent(env, disc, *pair);
  CHECK(rec.period == 1);
  REQUIRE(rec.chi.size() == 2);
  CHECK(rec.chi[0] == 1);  // the agents swap roles every period
  CHECK(rec.chi[1] == 0);

  const PatrolStrategy k4 = unroll(env, rec, 4);
  CHECK(validate(env, k4).empty());
}

TEST_CASE("hash detection matches the quadratic oracle on random instances") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 120 && compared < 50; ++seed) {
    auto scenario = patrol_test::random_scenario(seed, 3 + seed % 4, 1 + seed % 2, 300, 0.0);
    const Tick quantum = 1 + static_cast<Tick>(seed % 3);
    DiscreteStrategy disc = discretize(scenario.env, scenario.strategy, quantum);

    const auto engine = find_recurrence(scenario.env, disc);
    const auto snapshots = oracle::naive_departure_snapshots(scenario.env, disc);
    const auto reference = oracle::quadratic_recurrence_scan(snapshots, disc.base);

    CHECK(engine.has_value() == reference.has_value());
    if (engine && reference) {
      CHECK(engine->p == reference->p);
      CHECK(engine->q == reference->q);
      ++compared;
    }
  }
  CHECK(compared >= 20);
}

TEST_CASE("engine snapshots equal the naive ones") {
  const auto scenario = patrol_test::random_scenario(9, 5, 2, 200, 0.0);
  const DiscreteStrategy disc = discretize(scenario.env, scenario.strategy, 2);
  const auto engine = departure_snapshots(scenario.env, disc);
  const auto naive = oracle::naive_departure_snapshots(scenario.env, disc);
  REQUIRE(engine.size() == naive.size());
  for (std::size_t i = 0; i < engine.size(); ++i) {
    CHECK(engine[i].time == naive[i].time);
    CHECK(engine[i].idleness == naive[i].idleness);
    CHECK(engine[i].positions == naive[i].positions);
  }
}

TEST_CASE("on-edge elapsed values at departure instants are multiples of D") {
  int found = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto scenario = patrol_test::random_scenario(seed, 4 + seed % 5, 2, 300, 0.0);
    const Tick quantum = 2 + static_cast<Tick>(seed % 3);
    const DiscreteStrategy disc = discretize(scenario.env, scenario.strategy, quantum);
    for (const StateSnapshot& snap : departure_snapshots(scenario.env, disc)) {
      for (const AgentPosition& pos : snap.positions) {
        if (!pos.at_node()) {
          CHECK(pos.elapsed % quantum == 0);
          ++found;
        }
      }
    }
  }
  CHECK(found > 0);
}

TEST_CASE("snapshot periodicity: unrolled snapshots at j*L reproduce the start state") {
  int verified = 0;
  for (std::uint64_t seed = 1; seed <= 120 && verified < 25; ++seed) {
    const auto found = find_random_recurrence(seed);
    if (!found) continue;
    const RecurrentStrategy rec = build_recurrent(found->env, found->disc, found->pair);
    const PatrolStrategy k4 = unroll(found->env, rec, 4);
    REQUIRE(validate(found->env, k4).empty());
    const StrategyEvaluator eval(found->env, k4);
    for (int j = 1; j <= 3; ++j) {
      const StateSnapshot snap = eval.snapshot_at(rec.period * j);
      CHECK(snap.idleness == rec.start.idleness);
      CHECK(snap.sorted_positions() == rec.start.sorted_positions());
    }
    ++verified;
  }
  CHECK(verified >= 10);
}

TEST_CASE("every node appears in the recurrent segment") {
  int verified = 0;
  for (std::uint64_t seed = 1; seed <= 80 && verified < 15; ++verified, ++seed) {
    const auto found = find_random_recurrence(seed);
    if (!found) continue;
    const RecurrentStrategy rec = build_recurrent(found->env, found->disc, found->pair);
    std::vector<bool> seen(static_cast<std::size_t>(found->env.node_count()), false);
    for (const DepartureEvent& ev : rec.segment) seen[static_cast<std::size_t>(ev.node)] = true;
    for (bool b : seen) CHECK(b);
  }
}

TEST_CASE("recurrent cost never exceeds the discrete cost over the matched window") {
  int verified = 0;
  for (std::uint64_t seed = 1; seed <= 120 && verified < 20; ++seed) {
    const auto found = find_random_recurrence(seed);
    if (!found) continue;
    const RecurrentStrategy rec = build_recurrent(found->env, found->disc, found->pair);
    const Window window{found->disc.base.events[found->pair.p].t,
                        found->disc.base.events[found->pair.q].t};
    for (const CostSpec& spec :
         {CostSpec::gmi(), CostSpec::gai(static_cast<std::size_t>(found->env.node_count()))}) {
      const CostValue recurrent = recurrent_cost(found->env, rec, spec);
      const CostValue discrete = cost(found->env, found->disc.base, spec, window);
      CHECK(recurrent.exact_norm.value() <= discrete.exact_norm.value());
    }
    ++verified;
  }
  CHECK(verified >= 10);
}

TEST_CASE("unrolling the unroll re-analyzes to the identical steady-state cost") {
  const auto found = find_random_recurrence(2);
  REQUIRE(found.has_value());
  const RecurrentStrategy rec = build_recurrent(found->env, found->disc, found->pair);
  const CostValue direct = recurrent_cost(found->env, rec, CostSpec::gmi());
  const PatrolStrategy k3 = unroll(found->env, rec, 3);
  // Periodicity: any later period window evaluates to the same cost.
  const CostValue shifted =
      cost(found->env, k3, CostSpec::gmi(), Window{2 * rec.period, 3 * rec.period});
  CHECK(direct.value == doctest::Approx(shifted.value));
}

TEST_CASE("recurrent document round trips") {
  const Environment env = two_node_env(1);
  const DiscreteStrategy disc = golden_unit_tour(env, 4);
  const RecurrentStrategy rec = build_recurrent(env, disc, *find_recurrence(env, disc));

  std::ostringstream out;
  save_recurrent(env, rec, out);
  std::istringstream in(out.str());
  const RecurrentStrategy back = load_recurrent(env, in);

  CHECK(back.period == rec.period);
  CHECK(back.quantum == rec.quantum);
  CHECK(back.chi == rec.chi);
  CHECK(back.start.idleness == rec.start.idleness);
  CHECK(back.start.positions == rec.start.positions);
  REQUIRE(back.segment.size() == rec.segment.size());
  for (std::size_t i = 0; i < back.segment.size(); ++i) {
    CHECK(back.segment[i].t == rec.segment[i].t);
    CHECK(back.segment[i].node == rec.segment[i].node);
    CHECK(back.segment[i].agent == rec.segment[i].agent);
  }
}

TEST_CASE("derive_chi handles identity, unique and co-located matches") {
  StateSnapshot p, q;
  p.idleness = q.idleness = {0, 0};

  SUBCASE("single agent is the identity") {
    p.positions = {AgentPosition::at_node(0)};
    q.positions = {AgentPosition::at_node(0)};
    CHECK(derive_chi(p, q) == std::vector<AgentIndex>{0});
  }

  SUBCASE("distinct positions give the unique bijection") {
    p.positions = {AgentPosition::at_node(0), AgentPosition::at_node(1)};
    q.positions = {AgentPosition::at_node(1), AgentPosition::at_node(0)};
    CHECK(derive_chi(p, q) == std::vector<AgentIndex>{1, 0});
  }

  SUBCASE("co-located agents match in ascending id order") {
    p.positions = {AgentPosition::at_node(0), AgentPosition::at_node(0)};
    q.positions = {AgentPosition::at_node(0), AgentPosition::at_node(0)};
    CHECK(derive_chi(p, q) == std::vector<AgentIndex>{0, 1});
  }

  SUBCASE("mismatched multisets raise no_bijection") {
    p.positions = {AgentPosition::at_node(0)};
    q.positions = {AgentPosition::at_node(1)};
    CHECK_THROWS_AS(derive_chi(p, q), Error);
  }
}

TEST_CASE("build_recurrent rejects non-matching pairs") {
  const Environment env = two_node_env(1);
  const DiscreteStrategy disc = golden_unit_tour(env, 4);
  CHECK_THROWS_AS(build_recurrent(env, disc, RecurrencePair{0, 2}), Error);
  CHECK_THROWS_AS(build_recurrent(env, disc, RecurrencePair{2, 2}), Error);
}
