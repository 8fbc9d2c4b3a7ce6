#include <doctest.h>

#include <sstream>

#include "patrol/discretize.hpp"
#include "test_helpers.hpp"

using namespace patrol;
using patrol_test::bounce_tour;
using patrol_test::two_node_env;

TEST_CASE("already-discrete input is a fixed point") {
  const Environment env = two_node_env(4);
  const PatrolStrategy strat = bounce_tour(env, 4, 3, 8);
  const DiscreteStrategy disc = discretize(env, strat, 2);
  REQUIRE(disc.base.events.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(disc.base.events[i].t == strat.events[i].t);
    CHECK(disc.base.events[i].r == strat.events[i].r);
    CHECK(disc.audit[i].d == 0);
    CHECK(disc.audit[i].d_bar == 0);
  }
}

TEST_CASE("golden trace: w=3, D=2") {
  const Environment env = two_node_env(3);
  const PatrolStrategy strat = bounce_tour(env, 3, 3, 6);
  const DiscreteStrategy disc = discretize(env, strat, 2);

  REQUIRE(disc.base.events.size() == 3);
  CHECK(disc.base.events[0].t == 0);
  CHECK(disc.base.events[1].t == 4);
  CHECK(disc.base.events[2].t == 8);
  CHECK(disc.base.events[0].r == 0);
  CHECK(disc.base.events[1].r == 1);
  CHECK(disc.base.events[2].r == 1);
  CHECK(disc.audit[0].d == 0);
  CHECK(disc.audit[1].d == 1);
  CHECK(disc.audit[2].d == 2);
  CHECK(disc.audit[0].d_bar == 0);
  CHECK(disc.audit[1].d_bar == 1);
  CHECK(disc.audit[2].d_bar == 2);

  CHECK(check_discretization(env, strat, disc).empty());
}

TEST_CASE("check_discretization flags hand-corrupted outputs") {
  const Environment env = two_node_env(3);
  const PatrolStrategy strat = bounce_tour(env, 3, 3, 6);

  SUBCASE("off-grid departure") {
    DiscreteStrategy disc = discretize(env, strat, 2);
    disc.base.events[1].t += 1;
    const auto report = check_discretization(env, strat, disc);
    bool found = false;
    for (const auto& violation : report) {
      if (violation.event_index == 1 &&
          violation.what.find("multiple of D") != std::string::npos) {
        found = true;
      }
    }
    CHECK(found);
  }

  SUBCASE("shortened dwell") {
    const Environment env2 = two_node_env(3);
    PatrolStrategy dwelling = bounce_tour(env2, 3, 3, 20);
    dwelling.events[1].r = 2;  // dwell two ticks at v2
    dwelling.events[1].t = 5;
    dwelling.events[2].t = 8;
    REQUIRE(validate(env2, dwelling).empty());
    DiscreteStrategy disc = discretize(env2, dwelling, 2);
    disc.base.events[1].r = 1;  // below the source dwell
    const auto report = check_discretization(env2, dwelling, disc);
    bool found = false;
    for (const auto& violation : report) {
      if (violation.what.find("dwell shortened") != std::string::npos) found = true;
    }
    CHECK(found);
  }

  SUBCASE("length mismatch throws") {
    DiscreteStrategy disc = discretize(env, strat, 2);
    disc.base.events.pop_back();
    disc.audit.pop_back();
    CHECK_THROWS_AS(check_discretization(env, strat, disc), Error);
  }
}

TEST_CASE("invalid inputs are rejected") {
  const Environment env = two_node_env(3);
  const PatrolStrategy strat = bounce_tour(env, 3, 3, 6);
  CHECK_THROWS_AS(discretize(env, strat, 0), Error);
  PatrolStrategy broken = strat;
  broken.events[1].t = 4;
  CHECK_THROWS_AS(discretize(env, broken, 2), Error);
  try {
    discretize(env, strat, 0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_d);
  }
}

TEST_CASE("invariant suite and idempotence on random scenarios") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto scenario =
        patrol_test::random_scenario(seed, 5 + seed % 8, 1 + seed % 3, 600, 0.02);
    const Tick quantum = 1 + static_cast<Tick>(seed % 7);
    const DiscreteStrategy disc = discretize(scenario.env, scenario.strategy, quantum);

    CHECK(check_discretization(scenario.env, scenario.strategy, disc).empty());
    CHECK(validate(scenario.env, disc.base).empty());

    // Re-discretizing the output leaves it untouched with zero shifts.
    const DiscreteStrategy again = discretize(scenario.env, disc.base, quantum);
    REQUIRE(again.base.events.size() == disc.base.events.size());
    for (std::size_t i = 0; i < again.base.events.size(); ++i) {
      CHECK(again.base.events[i].t == disc.base.events[i].t);
      CHECK(again.base.events[i].r == disc.base.events[i].r);
      CHECK(again.audit[i].d == 0);
    }
  }
}

TEST_CASE("equal departure times keep their input order") {
  const Environment env = two_node_env(3);
  PatrolStrategy strat;
  strat.agents = {AgentSpec{"a1", env.require_node("v1")},
                  AgentSpec{"a2", env.require_node("v2")}};
  strat.horizon = 12;
  const NodeIndex v1 = env.require_node("v1");
  const NodeIndex v2 = env.require_node("v2");
  strat.events = {
      DepartureEvent{0, 0, v1, 0}, DepartureEvent{0, 0, v2, 1},
      DepartureEvent{3, 0, v2, 0}, DepartureEvent{3, 0, v1, 1},
      DepartureEvent{6, 0, v1, 0}, DepartureEvent{6, 0, v2, 1},
  };
  REQUIRE(validate(env, strat).empty());
  const DiscreteStrategy disc = discretize(env, strat, 2);
  for (std::size_t i = 1; i < disc.base.events.size(); ++i) {
    CHECK(disc.base.events[i].t >= disc.base.events[i - 1].t);
  }
  for (std::size_t i = 0; i < disc.base.events.size(); ++i) {
    CHECK(disc.base.events[i].agent == strat.events[i].agent);
    CHECK(disc.base.events[i].node == strat.events[i].node);
  }
  CHECK(check_discretization(env, strat, disc).empty());
}

TEST_CASE("audit trail CSV carries the golden trace") {
  const Environment env = two_node_env(3);
  const PatrolStrategy strat = bounce_tour(env, 3, 3, 6);
  const DiscreteStrategy disc = discretize(env, strat, 2);
  std::ostringstream out;
  write_audit_csv(env, strat, disc, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "index,t,tau,r,rho,d,d_bar,v,a");
  std::getline(lines, line);
  CHECK(line == "0,0,0,0,0,0,0,v1,a1");
  std::getline(lines, line);
  CHECK(line == "1,3,4,0,1,1,1,v2,a1");
  std::getline(lines, line);
  CHECK(line == "2,6,8,0,1,2,2,v1,a1");
}
