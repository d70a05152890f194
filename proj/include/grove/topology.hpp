#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace grove {

enum class NodeKind { CU, DU, Switch };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view text);

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::Switch;
  std::string label;
};

/// Directed fronthaul link. Capacity is in traffic-load units; infinity means uncapacitated.
struct Arc {
  int from = 0;
  int to = 0;
  double capacity = std::numeric_limits<double>::infinity();
};

/// Undirected link as written in an edge list; expanded to two arcs sharing a capacity.
struct Edge {
  int a = 0;
  int b = 0;
  double capacity = std::numeric_limits<double>::infinity();
};

enum class TopologyPreset { Du6, Du12, Du24 };

std::string_view to_string(TopologyPreset preset);
TopologyPreset topology_preset_from_string(std::string_view text);

/// Directed graph of one CU, the DUs and the packet switches between them.
///
/// Node ids are dense (0..n-1). DUs are ordered by node id; `du_node(r)` maps the
/// DU index r used throughout the model to its node id. The constructor enforces:
/// exactly one CU, at least one DU, no self loops, non-negative capacities and
/// two-way reachability between every DU and the CU.
class NetworkTopology {
 public:
  NetworkTopology() = default;
  NetworkTopology(std::vector<Node> nodes, std::vector<Arc> arcs);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int arc_count() const { return static_cast<int>(arcs_.size()); }
  int du_count() const { return static_cast<int>(du_nodes_.size()); }
  int switch_count() const;

  int cu_node() const { return cu_node_; }
  int du_node(int r) const { return du_nodes_.at(static_cast<std::size_t>(r)); }
  const std::vector<int>& du_nodes() const { return du_nodes_; }
  /// DU index of a node, or -1 when the node is not a DU.
  int du_index(int node) const { return du_index_.at(static_cast<std::size_t>(node)); }

  const std::vector<int>& out_arcs(int node) const { return out_.at(static_cast<std::size_t>(node)); }
  const std::vector<int>& in_arcs(int node) const { return in_.at(static_cast<std::size_t>(node)); }
  int find_arc(int from, int to) const;

  void set_capacity(int arc, double capacity);
  void set_all_capacities(double capacity);

  /// Hop distance from every node to the CU along directed arcs (-1 if unreachable).
  std::vector<int> hops_to_cu() const;

 private:
  void index_and_validate();

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<int> du_nodes_;
  std::vector<int> du_index_;
  int cu_node_ = -1;
};

/// Two-tier preset: CU -> two tier-1 switches -> tier-2 switches (chained to their
/// neighbours) -> two DUs per tier-2 switch. du6 has 12 nodes and 28 arcs.
NetworkTopology build_topology(TopologyPreset preset);

/// Expands each undirected edge into two arcs with the edge's capacity.
NetworkTopology build_topology(std::vector<Node> nodes, const std::vector<Edge>& edges);

}  // namespace grove
