#include "grove/topology.hpp"

#include <algorithm>
#include <deque>

#include "grove/error.hpp"

namespace grove {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::CU: return "CU";
    case NodeKind::DU: return "DU";
    case NodeKind::Switch: return "Switch";
  }
  return "?";
}

NodeKind node_kind_from_string(std::string_view text) {
  if (text == "CU" || text == "cu") return NodeKind::CU;
  if (text == "DU" || text == "du") return NodeKind::DU;
  if (text == "Switch" || text == "switch") return NodeKind::Switch;
  throw InvalidArgument("unknown node kind '" + std::string(text) + "'");
}

std::string_view to_string(TopologyPreset preset) {
  switch (preset) {
    case TopologyPreset::Du6: return "du6";
    case TopologyPreset::Du12: return "du12";
    case TopologyPreset::Du24: return "du24";
  }
  return "?";
}

TopologyPreset topology_preset_from_string(std::string_view text) {
  if (text == "du6") return TopologyPreset::Du6;
  if (text == "du12") return TopologyPreset::Du12;
  if (text == "du24") return TopologyPreset::Du24;
  throw InvalidArgument("unknown topology preset '" + std::string(text) + "'");
}

NetworkTopology::NetworkTopology(std::vector<Node> nodes, std::vector<Arc> arcs)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  index_and_validate();
}

int NetworkTopology::switch_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const Node& n) { return n.kind == NodeKind::Switch; }));
}

int NetworkTopology::find_arc(int from, int to) const {
  for (int e : out_arcs(from))
    if (arcs_[static_cast<std::size_t>(e)].to == to) return e;
  return -1;
}

void NetworkTopology::set_capacity(int arc, double capacity) {
  if (!(capacity >= 0.0)) throw TopologyError("arc capacity must be non-negative");
  arcs_.at(static_cast<std::size_t>(arc)).capacity = capacity;
}

void NetworkTopology::set_all_capacities(double capacity) {
  for (std::size_t e = 0; e < arcs_.size(); ++e) set_capacity(static_cast<int>(e), capacity);
}

std::vector<int> NetworkTopology::hops_to_cu() const {
  std::vector<int> dist(nodes_.size(), -1);
  std::deque<int> queue{cu_node_};
  dist[static_cast<std::size_t>(cu_node_)] = 0;
  while (!queue.empty()) {
    const int y = queue.front();
    queue.pop_front();
    for (int e : in_arcs(y)) {
      const int x = arcs_[static_cast<std::size_t>(e)].from;
      if (dist[static_cast<std::size_t>(x)] < 0) {
        dist[static_cast<std::size_t>(x)] = dist[static_cast<std::size_t>(y)] + 1;
        queue.push_back(x);
      }
    }
  }
  return dist;
}

void NetworkTopology::index_and_validate() {
  const auto n = nodes_.size();
  for (std::size_t v = 0; v < n; ++v)
    if (nodes_[v].id != static_cast<int>(v))
      throw TopologyError("node ids must be dense and ordered; node at position " + std::to_string(v) +
                          " has id " + std::to_string(nodes_[v].id));

  out_.assign(n, {});
  in_.assign(n, {});
  du_index_.assign(n, -1);
  du_nodes_.clear();
  cu_node_ = -1;
  for (const Node& node : nodes_) {
    if (node.kind == NodeKind::CU) {
      if (cu_node_ >= 0) throw TopologyError("topology has more than one CU node");
      cu_node_ = node.id;
    } else if (node.kind == NodeKind::DU) {
      du_index_[static_cast<std::size_t>(node.id)] = static_cast<int>(du_nodes_.size());
      du_nodes_.push_back(node.id);
    }
  }
  if (cu_node_ < 0) throw TopologyError("topology has no CU node");
  if (du_nodes_.empty()) throw TopologyError("topology has no DU node");

  for (std::size_t e = 0; e < arcs_.size(); ++e) {
    const Arc& arc = arcs_[e];
    if (arc.from < 0 || arc.to < 0 || arc.from >= static_cast<int>(n) || arc.to >= static_cast<int>(n))
      throw TopologyError("arc " + std::to_string(e) + " references an unknown node");
    if (arc.from == arc.to) throw TopologyError("arc " + std::to_string(e) + " is a self loop");
    if (!(arc.capacity >= 0.0)) throw TopologyError("arc " + std::to_string(e) + " has negative capacity");
    out_[static_cast<std::size_t>(arc.from)].push_back(static_cast<int>(e));
    in_[static_cast<std::size_t>(arc.to)].push_back(static_cast<int>(e));
  }

  const std::vector<int> to_cu = hops_to_cu();
  std::vector<int> from_cu(n, -1);
  std::deque<int> queue{cu_node_};
  from_cu[static_cast<std::size_t>(cu_node_)] = 0;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int e : out_arcs(x)) {
      const int y = arcs_[static_cast<std::size_t>(e)].to;
      if (from_cu[static_cast<std::size_t>(y)] < 0) {
        from_cu[static_cast<std::size_t>(y)] = from_cu[static_cast<std::size_t>(x)] + 1;
        queue.push_back(y);
      }
    }
  }
  for (int du : du_nodes_) {
    if (to_cu[static_cast<std::size_t>(du)] < 0 || from_cu[static_cast<std::size_t>(du)] < 0)
      throw TopologyError("DU node " + nodes_[static_cast<std::size_t>(du)].label + " (id " +
                          std::to_string(du) + ") is disconnected from the CU");
  }
}

NetworkTopology build_topology(std::vector<Node> nodes, const std::vector<Edge>& edges) {
  std::vector<Arc> arcs;
  arcs.reserve(edges.size() * 2);
  for (const Edge& edge : edges) {
    arcs.push_back({edge.a, edge.b, edge.capacity});
    arcs.push_back({edge.b, edge.a, edge.capacity});
  }
  return NetworkTopology(std::move(nodes), std::move(arcs));
}

NetworkTopology build_topology(TopologyPreset preset) {
  int du_count = 6;
  if (preset == TopologyPreset::Du12) du_count = 12;
  if (preset == TopologyPreset::Du24) du_count = 24;
  const int tier2 = du_count / 2;

  // ids: CU, tier-1 switches, tier-2 switches, DUs
  std::vector<Node> nodes;
  nodes.push_back({0, NodeKind::CU, "CU"});
  const int t1_base = 1;
  for (int k = 0; k < 2; ++k) nodes.push_back({t1_base + k, NodeKind::Switch, "S" + std::to_string(k + 1)});
  const int t2_base = t1_base + 2;
  for (int k = 0; k < tier2; ++k)
    nodes.push_back({t2_base + k, NodeKind::Switch, "S" + std::to_string(k + 3)});
  const int du_base = t2_base + tier2;
  for (int k = 0; k < du_count; ++k)
    nodes.push_back({du_base + k, NodeKind::DU, "DU" + std::to_string(k + 1)});

  std::vector<Edge> edges;
  edges.push_back({0, t1_base});
  edges.push_back({0, t1_base + 1});
  // tier-2 switch j hangs off the first tier-1 switch when j < ceil(n/2) and off the
  // second when j >= floor(n/2); with an odd count the middle one reaches both
  for (int j = 0; j < tier2; ++j) {
    if (j < (tier2 + 1) / 2) edges.push_back({t1_base, t2_base + j});
    if (j >= tier2 / 2) edges.push_back({t1_base + 1, t2_base + j});
  }
  for (int j = 0; j + 1 < tier2; ++j) edges.push_back({t2_base + j, t2_base + j + 1});
  for (int k = 0; k < du_count; ++k) edges.push_back({t2_base + k / 2, du_base + k});

  return build_topology(std::move(nodes), edges);
}

}  // namespace grove
