#include <doctest.h>

#include <set>
#include <sstream>

#include "patrol/environment.hpp"
#include "test_helpers.hpp"

using namespace patrol;

namespace {

const char* kMinimalDoc = R"({
  "nodes": [{"id": "v1", "phi": 1.0}, {"id": "v2", "phi": 0.5}],
  "edges": [{"from": "v1", "to": "v2", "w": 3}, {"from": "v2", "to": "v1", "w": 3}]
})";

Environment from_text(const std::string& text) {
  std::istringstream in(text);
  return load_environment(in);
}

}  // namespace

TEST_CASE("minimal two-node document loads and w_min is 3") {
  const Environment env = from_text(kMinimalDoc);
  CHECK(env.node_count() == 2);
  CHECK(env.edge_count() == 2);
  CHECK(min_edge_weight(env) == 3);
  CHECK(env.node(env.require_node("v2")).phi == doctest::Approx(0.5));
}

TEST_CASE("missing reverse edge is rejected as not strongly connected") {
  const char* doc = R"({
    "nodes": [{"id": "v1"}, {"id": "v2"}],
    "edges": [{"from": "v1", "to": "v2", "w": 3}]
  })";
  CHECK_THROWS_WITH_AS(from_text(doc), doctest::Contains("v2->v1"), Error);
  try {
    from_text(doc);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_strongly_connected);
  }
}

TEST_CASE("zero weight edge is rejected") {
  const char* doc = R"({
    "nodes": [{"id": "v1"}, {"id": "v2"}],
    "edges": [{"from": "v1", "to": "v2", "w": 0}, {"from": "v2", "to": "v1", "w": 3}]
  })";
  try {
    from_text(doc);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_positive_weight);
    CHECK(std::string(e.what()).find("v1 -> v2") != std::string::npos);
  }
}

TEST_CASE("phi outside [0,1] is rejected") {
  const char* doc = R"({
    "nodes": [{"id": "v1", "phi": 1.5}, {"id": "v2"}],
    "edges": [{"from": "v1", "to": "v2", "w": 3}, {"from": "v2", "to": "v1", "w": 3}]
  })";
  try {
    from_text(doc);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_phi);
  }
}

TEST_CASE("unknown keys, duplicates and self-loops are parse errors") {
  CHECK_THROWS_AS(from_text(R"({"nodes": [], "edges": [], "extra": 1})"), Error);
  CHECK_THROWS_AS(from_text(R"({
    "nodes": [{"id": "v1", "color": "red"}, {"id": "v2"}],
    "edges": [{"from": "v1", "to": "v2", "w": 3}, {"from": "v2", "to": "v1", "w": 3}]
  })"),
                  Error);
  CHECK_THROWS_AS(from_text(R"({
    "nodes": [{"id": "v1"}, {"id": "v1"}],
    "edges": [{"from": "v1", "to": "v1", "w": 3}]
  })"),
                  Error);
  CHECK_THROWS_AS(from_text(R"({
    "nodes": [{"id": "v1"}, {"id": "v2"}],
    "edges": [{"from": "v1", "to": "v1", "w": 3}, {"from": "v2", "to": "v1", "w": 3}]
  })"),
                  Error);
  CHECK_THROWS_AS(from_text("not json"), Error);
}

TEST_CASE("round trip preserves every field") {
  const Environment env = random_environment(17, 2.3, {2, 11}, 99);
  std::ostringstream out;
  save_environment(env, out);
  const Environment back = from_text(out.str());
  REQUIRE(back.node_count() == env.node_count());
  REQUIRE(back.edge_count() == env.edge_count());
  for (NodeIndex v = 0; v < env.node_count(); ++v) {
    CHECK(back.node(v).id == env.node(v).id);
    CHECK(back.node(v).phi == env.node(v).phi);
    CHECK(back.node(v).deadline == env.node(v).deadline);
  }
  for (std::size_t e = 0; e < env.edge_count(); ++e) {
    CHECK(back.edges()[e].from == env.edges()[e].from);
    CHECK(back.edges()[e].to == env.edges()[e].to);
    CHECK(back.edges()[e].weight == env.edges()[e].weight);
  }
}

TEST_CASE("two-node generator instance is the bidirectional graph") {
  const Environment env = random_environment(2, 1.0, {3, 3}, 7);
  CHECK(env.node_count() == 2);
  CHECK(env.edge_count() == 2);
  CHECK(env.edge_weight(0, 1).value() == 3);
  CHECK(env.edge_weight(1, 0).value() == 3);
}

TEST_CASE("fifty-node generator instance hits the target edge count") {
  const Environment env = random_environment(50, 2.6, {5, 60}, 1);
  CHECK(env.node_count() == 50);
  CHECK(env.edge_count() == 130);
}

TEST_CASE("generator is deterministic in the seed") {
  const Environment a = random_environment(23, 2.1, {1, 20}, 424242);
  const Environment b = random_environment(23, 2.1, {1, 20}, 424242);
  REQUIRE(a.edge_count() == b.edge_count());
  for (std::size_t e = 0; e < a.edge_count(); ++e) {
    CHECK(a.edges()[e].from == b.edges()[e].from);
    CHECK(a.edges()[e].to == b.edges()[e].to);
    CHECK(a.edges()[e].weight == b.edges()[e].weight);
  }
}

TEST_CASE("generator output passes the invariant suite across seeds") {
  // Construction re-validates everything (make() throws otherwise); also
  // check the weight range and w_min <= every weight exhaustively.
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int n = 2 + static_cast<int>(seed % 14);
    const double degree = 1.0 + 0.07 * static_cast<double>(seed % 20);
    const Environment env =
        random_environment(n, std::min(degree, static_cast<double>(n - 1)), {1, 9}, seed);
    const Tick w_min = min_edge_weight(env);
    for (const EdgeSpec& e : env.edges()) {
      CHECK(e.weight >= 1);
      CHECK(e.weight <= 9);
      CHECK(w_min <= e.weight);
    }
  }
}

TEST_CASE("infeasible degrees are rejected") {
  CHECK_THROWS_AS(random_environment(5, 0.5, {1, 5}, 1), Error);
  CHECK_THROWS_AS(random_environment(5, 4.5, {1, 5}, 1), Error);
  try {
    random_environment(5, 0.5, {1, 5}, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible_degree);
  }
}

TEST_CASE("deadline must be positive and round trips") {
  const Environment env = patrol_test::two_node_env_with_deadline(3, 7);
  CHECK(env.has_deadlines());
  CHECK(env.node(env.require_node("v1")).deadline.value() == 7);
  CHECK_THROWS_AS(from_text(R"({
    "nodes": [{"id": "v1", "T": 0}, {"id": "v2"}],
    "edges": [{"from": "v1", "to": "v2", "w": 3}, {"from": "v2", "to": "v1", "w": 3}]
  })"),
                  Error);
}
