#include "patrol/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "patrol/rng.hpp"

namespace patrol {

using json = nlohmann::json;

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::parse_error: return "ParseError";
    case Errc::not_strongly_connected: return "NotStronglyConnected";
    case Errc::non_positive_weight: return "NonPositiveWeight";
    case Errc::bad_phi: return "BadPhi";
    case Errc::infeasible_degree: return "InfeasibleDegree";
    case Errc::out_of_window: return "OutOfWindow";
    case Errc::empty_window: return "EmptyWindow";
    case Errc::no_nonzero_idleness: return "NoNonzeroIdleness";
    case Errc::dead_end: return "DeadEnd";
    case Errc::invalid_d: return "InvalidD";
    case Errc::invalid_input: return "InvalidInput";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::no_bijection: return "NoBijection";
    case Errc::invalid_pair: return "InvalidPair";
    case Errc::missing_i_min: return "MissingIMin";
    case Errc::io_error: return "IoError";
  }
  return "Error";
}

namespace {

// Reachability sweep used in both directions for the connectivity check.
std::vector<bool> reachable_from(NodeIndex source,
                                 const std::vector<std::vector<NodeIndex>>& adjacency) {
  std::vector<bool> seen(adjacency.size(), false);
  std::vector<NodeIndex> stack = {source};
  seen[static_cast<std::size_t>(source)] = true;
  while (!stack.empty()) {
    const NodeIndex v = stack.back();
    stack.pop_back();
    for (NodeIndex w : adjacency[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

Environment Environment::make(std::vector<NodeSpec> nodes, std::vector<RawEdge> raw_edges,
                              double tick_seconds) {
  Environment env;
  if (nodes.empty()) throw Error(Errc::parse_error, "environment has no nodes");

  env.nodes_ = std::move(nodes);
  env.tick_seconds_ = tick_seconds;
  for (std::size_t i = 0; i < env.nodes_.size(); ++i) {
    const NodeSpec& node = env.nodes_[i];
    if (node.id.empty()) throw Error(Errc::parse_error, "node with empty id");
    if (!(node.phi >= 0.0 && node.phi <= 1.0)) {
      throw Error(Errc::bad_phi, "phi of node '" + node.id + "' is outside [0, 1]");
    }
    if (node.deadline && *node.deadline <= 0) {
      throw Error(Errc::parse_error, "deadline of node '" + node.id + "' must be positive");
    }
    if (!env.index_.emplace(node.id, static_cast<NodeIndex>(i)).second) {
      throw Error(Errc::parse_error, "duplicate node id '" + node.id + "'");
    }
  }

  const std::size_t n = env.nodes_.size();
  env.out_.resize(n);
  std::set<std::pair<NodeIndex, NodeIndex>> seen_pairs;
  for (const RawEdge& raw : raw_edges) {
    const NodeIndex from = env.require_node(raw.from);
    const NodeIndex to = env.require_node(raw.to);
    if (from == to) {
      throw Error(Errc::parse_error, "self-loop at node '" + raw.from + "'");
    }
    if (!seen_pairs.emplace(from, to).second) {
      throw Error(Errc::parse_error,
                  "duplicate edge " + raw.from + " -> " + raw.to);
    }
    if (raw.weight <= 0) {
      throw Error(Errc::non_positive_weight,
                  "edge " + raw.from + " -> " + raw.to + " has non-positive weight");
    }
    env.edges_.push_back(EdgeSpec{from, to, raw.weight});
    env.out_[static_cast<std::size_t>(from)].emplace_back(to, raw.weight);
  }
  for (auto& neighbors : env.out_) {
    std::sort(neighbors.begin(), neighbors.end());
  }

  // Strong connectivity: every node reachable from node 0 and node 0
  // reachable from every node.
  std::vector<std::vector<NodeIndex>> forward(n), backward(n);
  for (const EdgeSpec& e : env.edges_) {
    forward[static_cast<std::size_t>(e.from)].push_back(e.to);
    backward[static_cast<std::size_t>(e.to)].push_back(e.from);
  }
  const std::vector<bool> fwd = reachable_from(0, forward);
  const std::vector<bool> bwd = reachable_from(0, backward);
  std::string unreachable;
  int listed = 0;
  for (std::size_t i = 0; i < n && listed < 5; ++i) {
    if (!fwd[i]) {
      unreachable += " " + env.nodes_[0].id + "->" + env.nodes_[i].id;
      ++listed;
    } else if (!bwd[i]) {
      unreachable += " " + env.nodes_[i].id + "->" + env.nodes_[0].id;
      ++listed;
    }
  }
  if (!unreachable.empty()) {
    throw Error(Errc::not_strongly_connected,
                "graph is not strongly connected; unreachable pairs:" + unreachable);
  }
  return env;
}

std::optional<NodeIndex> Environment::find_node(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Environment::require_node(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw Error(Errc::parse_error, "unknown node id '" + id + "'");
  return it->second;
}

std::optional<Tick> Environment::edge_weight(NodeIndex from, NodeIndex to) const {
  const auto& neighbors = out_[static_cast<std::size_t>(from)];
  const auto it = std::lower_bound(neighbors.begin(), neighbors.end(),
                                   std::make_pair(to, Tick{0}));
  if (it != neighbors.end() && it->first == to) return it->second;
  return std::nullopt;
}

bool Environment::has_deadlines() const {
  return std::any_of(nodes_.begin(), nodes_.end(),
                     [](const NodeSpec& n) { return n.deadline.has_value(); });
}

Tick min_edge_weight(const Environment& env) {
  Tick best = env.edges().front().weight;
  for (const EdgeSpec& e : env.edges()) best = std::min(best, e.weight);
  return best;
}

namespace {

void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const char* context) {
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error(Errc::parse_error,
                  std::string("unknown key '") + item.key() + "' in " + context);
    }
  }
}

Tick require_integer(const json& value, const char* what) {
  if (!value.is_number_integer()) {
    throw Error(Errc::parse_error, std::string(what) + " must be an integer");
  }
  return value.get<Tick>();
}

}  // namespace

Environment load_environment(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed environment document: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::parse_error, "environment document must be an object");
  reject_unknown_keys(doc, {"nodes", "edges", "tick_seconds"}, "environment document");
  if (!doc.contains("nodes") || !doc.contains("edges")) {
    throw Error(Errc::parse_error, "environment document needs 'nodes' and 'edges'");
  }

  std::vector<NodeSpec> nodes;
  for (const json& jn : doc.at("nodes")) {
    if (!jn.is_object()) throw Error(Errc::parse_error, "node entry must be an object");
    reject_unknown_keys(jn, {"id", "phi", "T"}, "node entry");
    NodeSpec node;
    node.id = jn.at("id").get<std::string>();
    if (jn.contains("phi")) {
      if (!jn.at("phi").is_number()) throw Error(Errc::bad_phi, "phi must be a number");
      node.phi = jn.at("phi").get<double>();
    }
    if (jn.contains("T")) node.deadline = require_integer(jn.at("T"), "node deadline T");
    nodes.push_back(std::move(node));
  }

  std::vector<RawEdge> edges;
  for (const json& je : doc.at("edges")) {
    if (!je.is_object()) throw Error(Errc::parse_error, "edge entry must be an object");
    reject_unknown_keys(je, {"from", "to", "w"}, "edge entry");
    RawEdge edge;
    edge.from = je.at("from").get<std::string>();
    edge.to = je.at("to").get<std::string>();
    edge.weight = require_integer(je.at("w"), "edge weight w");
    edges.push_back(std::move(edge));
  }

  double tick_seconds = 1.0;
  if (doc.contains("tick_seconds")) {
    if (!doc.at("tick_seconds").is_number()) {
      throw Error(Errc::parse_error, "tick_seconds must be a number");
    }
    tick_seconds = doc.at("tick_seconds").get<double>();
  }
  return Environment::make(std::move(nodes), std::move(edges), tick_seconds);
}

Environment load_environment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open environment file '" + path + "'");
  return load_environment(in);
}

void save_environment(const Environment& env, std::ostream& out) {
  json doc;
  doc["nodes"] = json::array();
  for (const NodeSpec& node : env.nodes()) {
    json jn{{"id", node.id}, {"phi", node.phi}};
    if (node.deadline) jn["T"] = *node.deadline;
    doc["nodes"].push_back(std::move(jn));
  }
  doc["edges"] = json::array();
  for (const EdgeSpec& edge : env.edges()) {
    doc["edges"].push_back(json{{"from", env.node(edge.from).id},
                                {"to", env.node(edge.to).id},
                                {"w", edge.weight}});
  }
  doc["tick_seconds"] = env.tick_seconds();
  out << doc.dump(2) << '\n';
}

Environment random_environment(int n_nodes, double avg_degree,
                               std::pair<Tick, Tick> weight_range, std::uint64_t seed) {
  if (n_nodes < 2) throw Error(Errc::parse_error, "need at least 2 nodes");
  if (weight_range.first < 1 || weight_range.second < weight_range.first) {
    throw Error(Errc::non_positive_weight, "weight range must satisfy 1 <= lo <= hi");
  }
  if (avg_degree < 1.0 || avg_degree > static_cast<double>(n_nodes - 1)) {
    throw Error(Errc::infeasible_degree,
                "avg_degree must lie in [1, n-1] for a simple strongly connected digraph");
  }

  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(n_nodes);

  std::vector<NodeSpec> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i].id = "v" + std::to_string(i + 1);

  // Random spanning cycle first, then extra arcs up to the target count.
  std::vector<NodeIndex> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeIndex>(i);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(order[i], order[j]);
  }

  std::set<std::pair<NodeIndex, NodeIndex>> used;
  std::vector<RawEdge> edges;
  const auto add_edge = [&](NodeIndex from, NodeIndex to) {
    used.emplace(from, to);
    const Tick w = rng.uniform_int(weight_range.first, weight_range.second);
    edges.push_back(RawEdge{nodes[static_cast<std::size_t>(from)].id,
                            nodes[static_cast<std::size_t>(to)].id, w});
  };
  for (std::size_t i = 0; i < n; ++i) add_edge(order[i], order[(i + 1) % n]);

  const auto target = static_cast<std::size_t>(
      std::llround(avg_degree * static_cast<double>(n_nodes)));
  while (edges.size() < target) {
    const auto a = static_cast<NodeIndex>(rng.uniform_int(0, n_nodes - 1));
    const auto b = static_cast<NodeIndex>(rng.uniform_int(0, n_nodes - 1));
    if (a == b || used.count({a, b})) continue;
    add_edge(a, b);
  }
  return Environment::make(std::move(nodes), std::move(edges));
}

}  // namespace patrol
