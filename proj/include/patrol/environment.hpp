/*
 * Patrol environment: a strongly connected weighted digraph with node
 * importance weights and optional visit deadlines.
 *
 * Immutable after construction; safe to share across concurrent readers.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "patrol/types.hpp"

namespace patrol {

struct NodeSpec {
  std::string id;
  double phi = 1.0;                 // importance weight in [0, 1]
  std::optional<Tick> deadline;     // T_k; nodes with one form the set V^T
};

struct EdgeSpec {
  NodeIndex from = kNoNode;
  NodeIndex to = kNoNode;
  Tick weight = 0;                  // traversal time, > 0
};

struct RawEdge {
  std::string from;
  std::string to;
  Tick weight = 0;
};

class Environment {
 public:
  // Validates all invariants: unique ids, at most one edge per ordered pair,
  // no self-loops, positive weights, phi in [0,1], strong connectivity.
  // Throws Error with the matching code otherwise.
  static Environment make(std::vector<NodeSpec> nodes, std::vector<RawEdge> edges,
                          double tick_seconds = 1.0);

  NodeIndex node_count() const { return static_cast<NodeIndex>(nodes_.size()); }
  std::size_t edge_count() const { return edges_.size(); }

  const NodeSpec& node(NodeIndex v) const { return nodes_[static_cast<std::size_t>(v)]; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<EdgeSpec>& edges() const { return edges_; }

  // Out-neighbors of v, sorted by target index (the global tie-break order).
  const std::vector<std::pair<NodeIndex, Tick>>& out_neighbors(NodeIndex v) const {
    return out_[static_cast<std::size_t>(v)];
  }

  std::optional<NodeIndex> find_node(const std::string& id) const;
  NodeIndex require_node(const std::string& id) const;  // throws parse_error

  std::optional<Tick> edge_weight(NodeIndex from, NodeIndex to) const;

  bool has_deadlines() const;
  double tick_seconds() const { return tick_seconds_; }

 private:
  Environment() = default;

  std::vector<NodeSpec> nodes_;
  std::vector<EdgeSpec> edges_;
  std::vector<std::vector<std::pair<NodeIndex, Tick>>> out_;
  std::unordered_map<std::string, NodeIndex> index_;
  double tick_seconds_ = 1.0;
};

// w underbar: minimum edge weight over the whole graph.
Tick min_edge_weight(const Environment& env);

// Reads the UTF-8 JSON environment document. Unknown keys are rejected.
Environment load_environment(std::istream& in);
Environment load_environment_file(const std::string& path);
void save_environment(const Environment& env, std::ostream& out);

// Seeded synthetic generator: a random spanning cycle guarantees strong
// connectivity, then extra random arcs are added until the edge count reaches
// round(avg_degree * n_nodes). Deterministic given the seed.
Environment random_environment(int n_nodes, double avg_degree,
                               std::pair<Tick, Tick> weight_range,
                               std::uint64_t seed);

}  // namespace patrol
