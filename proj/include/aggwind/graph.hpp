#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace aggwind {

/// Farm label. Farms are numbered from 1; index 0 is reserved for the virtual node.
struct NodeId {
  int value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
  constexpr bool is_virtual() const { return value == 0; }
};

inline constexpr NodeId kVirtualNode{0};

std::string to_string(NodeId id);

struct Position {
  double x_km = 0.0;
  double y_km = 0.0;
};

/// Farm coordinates; farm k (1-based) sits at positions[k - 1].
class FarmLayout {
 public:
  explicit FarmLayout(std::vector<Position> positions);

  std::size_t size() const { return positions_.size(); }
  const std::vector<Position>& positions() const { return positions_; }
  const Position& at(NodeId id) const;
  std::vector<NodeId> node_ids() const;
  double distance(NodeId a, NodeId b) const;

 private:
  std::vector<Position> positions_;
};

/// The 10-farm layout used by every study unless a layout file is given.
/// At 4 km its 4-core is {2,4,5,7,9}, {1,10} have coreness 2 and {3,6,8}
/// coreness 1; it is disconnected below 4 km and complete at 8.5 km.
FarmLayout builtin_layout();

FarmLayout load_layout_csv(const std::string& path);
FarmLayout parse_layout_csv(const std::string& text);
std::string layout_to_csv(const FarmLayout& layout);

/// Undirected communication graph over farms, optionally with the virtual node.
class CommGraph {
 public:
  CommGraph() = default;
  CommGraph(std::vector<NodeId> nodes, const std::vector<std::pair<NodeId, NodeId>>& edges);

  const std::vector<NodeId>& node_ids() const { return nodes_; }
  /// Farm nodes only (virtual node excluded).
  std::vector<NodeId> farm_ids() const;
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId id) const { return adjacency_.count(id) != 0; }

  const std::set<NodeId>& neighbors(NodeId id) const;
  std::size_t degree(NodeId id) const { return neighbors(id).size(); }
  bool has_edge(NodeId a, NodeId b) const;
  /// Every edge once, as (smaller, larger), in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::size_t edge_count() const;

  bool has_vn() const { return has_vn_; }
  const std::set<NodeId>& vn_neighbors() const { return vn_neighbors_; }

 private:
  friend CommGraph attach_virtual_node(const CommGraph& graph, const std::vector<NodeId>& key_nodes);

  std::vector<NodeId> nodes_;
  std::map<NodeId, std::set<NodeId>> adjacency_;
  bool has_vn_ = false;
  std::set<NodeId> vn_neighbors_;
};

using CorenessMap = std::map<NodeId, int>;

/// Edge (i, j) iff the farms are at most `threshold_km` apart.
CommGraph build_threshold_graph(const FarmLayout& layout, double threshold_km);

bool is_connected(const CommGraph& graph);

/// Components in order of their smallest member; members sorted.
std::vector<std::vector<NodeId>> connected_components(const CommGraph& graph);

/// Subgraph induced by `members`. The virtual node keeps its flag if it is kept.
CommGraph induced_subgraph(const CommGraph& graph, const std::vector<NodeId>& members);

/// Bucket-peeling core decomposition (Batagelj-Zaversnik), O(V + E).
CorenessMap k_core_decomposition(const CommGraph& graph);

/// Top ceil(percentage * N) nodes by coreness desc, tiebreak asc, id asc.
std::vector<NodeId> select_key_nodes(const CorenessMap& coreness, double percentage,
                                     const std::map<NodeId, double>& tiebreak);

/// Tiebreak score used when no local-estimate RMSE is available: -degree.
std::map<NodeId, double> degree_tiebreak(const CommGraph& graph);

CommGraph attach_virtual_node(const CommGraph& graph, const std::vector<NodeId>& key_nodes);

/// Sum of farm-to-farm edge lengths. Virtual-node links have no physical length.
double total_line_length(const CommGraph& graph, const FarmLayout& layout);

/// Consensus weights; row/column k corresponds to graph.node_ids()[k].
struct WeightMatrix {
  std::vector<NodeId> order;
  Eigen::MatrixXd weights;

  std::size_t index_of(NodeId id) const;
};

/// Metropolis-Hastings weights: 1 / (1 + max(deg i, deg j)) on edges, remainder on the diagonal.
WeightMatrix metropolis_weights(const CommGraph& graph);

/// Edge list `u,v,length_km` plus a `vn_neighbors:` line when the virtual node is present.
std::string graph_to_csv(const CommGraph& graph, const FarmLayout& layout);

}  // namespace aggwind
