#include "aggwind/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "aggwind/errors.hpp"
#include "aggwind/text.hpp"

namespace aggwind {

std::string to_string(NodeId id) { return std::to_string(id.value); }

// ---------------------------------------------------------------------------
// FarmLayout

FarmLayout::FarmLayout(std::vector<Position> positions) : positions_(std::move(positions)) {
  // A one-farm layout is accepted so degenerate studies (single farm) can run.
  if (positions_.empty()) throw InvalidArgument("layout needs at least one farm");
  for (const auto& p : positions_) {
    if (!std::isfinite(p.x_km) || !std::isfinite(p.y_km)) {
      throw InvalidArgument("layout coordinates must be finite");
    }
  }
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    for (std::size_t j = i + 1; j < positions_.size(); ++j) {
      if (std::hypot(positions_[i].x_km - positions_[j].x_km,
                     positions_[i].y_km - positions_[j].y_km) <= 0.0) {
        throw InvalidArgument("farms " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                              " share a position");
      }
    }
  }
}

const Position& FarmLayout::at(NodeId id) const {
  if (id.value < 1 || static_cast<std::size_t>(id.value) > positions_.size()) {
    throw InvalidArgument("no farm " + to_string(id) + " in layout");
  }
  return positions_[static_cast<std::size_t>(id.value - 1)];
}

std::vector<NodeId> FarmLayout::node_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(positions_.size());
  for (std::size_t k = 0; k < positions_.size(); ++k) ids.push_back(NodeId{static_cast<int>(k + 1)});
  return ids;
}

double FarmLayout::distance(NodeId a, NodeId b) const {
  const Position& pa = at(a);
  const Position& pb = at(b);
  return std::hypot(pa.x_km - pb.x_km, pa.y_km - pb.y_km);
}

FarmLayout builtin_layout() {
  // Solved offline by tools/solve_layout.py; spokes are 3.6-3.9 km long,
  // every non-edge at 4 km is longer than 4.02 km.
  return FarmLayout({
      {3.98, 8.35},  // 1
      {3.32, 4.10},  // 2
      {3.09, 0.00},  // 3
      {2.52, 4.74},  // 4
      {4.09, 4.75},  // 5
      {0.00, 7.36},  // 6
      {2.32, 3.61},  // 7
      {7.69, 6.15},  // 8
      {0.67, 3.32},  // 9
      {6.58, 2.15},  // 10
  });
}

FarmLayout parse_layout_csv(const std::string& contents) {
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  struct Row {
    int id;
    Position pos;
    int line;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      if (t != "node_id,x_km,y_km") throw ParseError("expected header node_id,x_km,y_km", line_no);
      header_seen = true;
      continue;
    }
    const auto cols = text::split(t, ',');
    if (cols.size() != 3) throw ParseError("expected 3 columns", line_no);
    const auto id = text::parse_int(cols[0]);
    const auto x = text::parse_double(cols[1]);
    const auto y = text::parse_double(cols[2]);
    if (!id || !x || !y) throw ParseError("malformed row", line_no);
    rows.push_back({static_cast<int>(*id), Position{*x, *y}, line_no});
  }
  if (!header_seen) throw ParseError("empty layout file", line_no);
  if (rows.empty()) throw ParseError("layout has no farms", line_no);
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
  std::vector<Position> positions;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].id != static_cast<int>(k + 1)) {
      throw ParseError("layout node ids must be 1..N without gaps or repeats", rows[k].line);
    }
    positions.push_back(rows[k].pos);
  }
  return FarmLayout(std::move(positions));
}

FarmLayout load_layout_csv(const std::string& path) { return parse_layout_csv(text::read_file(path)); }

std::string layout_to_csv(const FarmLayout& layout) {
  std::string out = "node_id,x_km,y_km\n";
  for (const NodeId id : layout.node_ids()) {
    const Position& p = layout.at(id);
    out += to_string(id) + "," + text::format_double(p.x_km) + "," + text::format_double(p.y_km) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// CommGraph

CommGraph::CommGraph(std::vector<NodeId> nodes, const std::vector<std::pair<NodeId, NodeId>>& edges)
    : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw InvalidArgument("duplicate node id");
  }
  for (const NodeId id : nodes_) {
    if (id.is_virtual()) throw InvalidArgument("node 0 is reserved for the virtual node");
    adjacency_[id];
  }
  for (const auto& [a, b] : edges) {
    if (a == b) throw InvalidArgument("self-loop at node " + to_string(a));
    if (!contains(a) || !contains(b)) throw InvalidArgument("edge references unknown node");
    if (!adjacency_[a].insert(b).second) throw InvalidArgument("duplicate edge " + to_string(a) + "-" + to_string(b));
    adjacency_[b].insert(a);
  }
}

std::vector<NodeId> CommGraph::farm_ids() const {
  std::vector<NodeId> out;
  for (const NodeId id : nodes_) {
    if (!id.is_virtual()) out.push_back(id);
  }
  return out;
}

const std::set<NodeId>& CommGraph::neighbors(NodeId id) const {
  const auto it = adjacency_.find(id);
  if (it == adjacency_.end()) throw InvalidArgument("node " + to_string(id) + " not in graph");
  return it->second;
}

bool CommGraph::has_edge(NodeId a, NodeId b) const {
  const auto it = adjacency_.find(a);
  return it != adjacency_.end() && it->second.count(b) != 0;
}

std::vector<std::pair<NodeId, NodeId>> CommGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& [u, nbrs] : adjacency_) {
    for (const NodeId v : nbrs) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::size_t CommGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& [u, nbrs] : adjacency_) twice += nbrs.size();
  return twice / 2;
}

// ---------------------------------------------------------------------------
// Construction and traversal

CommGraph build_threshold_graph(const FarmLayout& layout, double threshold_km) {
  if (!std::isfinite(threshold_km)) throw InvalidArgument("threshold must be finite");
  if (threshold_km <= 0.0) throw InvalidArgument("threshold must be positive");
  const auto ids = layout.node_ids();
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (layout.distance(ids[i], ids[j]) <= threshold_km) edges.emplace_back(ids[i], ids[j]);
    }
  }
  return CommGraph(ids, edges);
}

std::vector<std::vector<NodeId>> connected_components(const CommGraph& graph) {
  std::set<NodeId> seen;
  std::vector<std::vector<NodeId>> out;
  for (const NodeId start : graph.node_ids()) {
    if (seen.count(start)) continue;
    std::vector<NodeId> comp;
    std::queue<NodeId> frontier;
    frontier.push(start);
    seen.insert(start);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      comp.push_back(u);
      for (const NodeId v : graph.neighbors(u)) {
        if (seen.insert(v).second) frontier.push(v);
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool is_connected(const CommGraph& graph) {
  if (graph.size() == 0) throw InvalidArgument("empty graph");
  return connected_components(graph).size() == 1;
}

CommGraph induced_subgraph(const CommGraph& graph, const std::vector<NodeId>& members) {
  const std::set<NodeId> keep(members.begin(), members.end());
  for (const NodeId id : keep) {
    if (!graph.contains(id)) throw InvalidArgument("node " + to_string(id) + " not in graph");
  }
  std::vector<NodeId> farms;
  for (const NodeId id : keep) {
    if (!id.is_virtual()) farms.push_back(id);
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& [u, v] : graph.edges()) {
    if (!u.is_virtual() && keep.count(u) && keep.count(v)) edges.emplace_back(u, v);
  }
  CommGraph sub(farms, edges);
  if (keep.count(kVirtualNode)) {
    std::vector<NodeId> keys;
    for (const NodeId v : graph.vn_neighbors()) {
      if (keep.count(v)) keys.push_back(v);
    }
    if (!keys.empty()) sub = attach_virtual_node(sub, keys);
  }
  return sub;
}

CorenessMap k_core_decomposition(const CommGraph& graph) {
  if (graph.has_vn()) throw InvalidArgument("core decomposition is defined on farm nodes only");
  const auto& ids = graph.node_ids();
  const std::size_t n = ids.size();
  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[ids[i]] = i;

  std::vector<std::size_t> deg(n);
  std::size_t max_deg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    deg[i] = graph.degree(ids[i]);
    max_deg = std::max(max_deg, deg[i]);
  }
  // bin[d] = first position in `vert` of a vertex with current degree d.
  std::vector<std::size_t> bin(max_deg + 1, 0);
  for (std::size_t i = 0; i < n; ++i) ++bin[deg[i]];
  std::size_t start = 0;
  for (std::size_t d = 0; d <= max_deg; ++d) {
    const std::size_t count = bin[d];
    bin[d] = start;
    start += count;
  }
  std::vector<std::size_t> vert(n), pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = bin[deg[i]]++;
    vert[pos[i]] = i;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t v = vert[k];
    for (const NodeId nb : graph.neighbors(ids[v])) {
      const std::size_t u = index.at(nb);
      if (deg[u] > deg[v]) {
        const std::size_t du = deg[u];
        const std::size_t pu = pos[u];
        const std::size_t pw = bin[du];
        const std::size_t w = vert[pw];
        if (u != w) {
          pos[u] = pw;
          vert[pu] = w;
          pos[w] = pu;
          vert[pw] = u;
        }
        ++bin[du];
        --deg[u];
      }
    }
  }
  CorenessMap out;
  for (std::size_t i = 0; i < n; ++i) out[ids[i]] = static_cast<int>(deg[i]);
  return out;
}

std::vector<NodeId> select_key_nodes(const CorenessMap& coreness, double percentage,
                                     const std::map<NodeId, double>& tiebreak) {
  if (!(percentage > 0.0) || percentage > 1.0) {
    throw InvalidArgument("key-node percentage must be in (0, 1]");
  }
  std::vector<NodeId> ranked;
  for (const auto& [id, k] : coreness) {
    if (!tiebreak.count(id)) throw InvalidArgument("no tiebreak score for node " + to_string(id));
    ranked.push_back(id);
  }
  std::sort(ranked.begin(), ranked.end(), [&](NodeId a, NodeId b) {
    const int ka = coreness.at(a);
    const int kb = coreness.at(b);
    if (ka != kb) return ka > kb;
    const double ta = tiebreak.at(a);
    const double tb = tiebreak.at(b);
    if (ta != tb) return ta < tb;
    return a < b;
  });
  // Guard against 0.3 * 10 evaluating to 3.0000000000000004.
  const double raw = percentage * static_cast<double>(ranked.size());
  auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  count = std::clamp<std::size_t>(count, 1, ranked.size());
  ranked.resize(count);
  return ranked;
}

std::map<NodeId, double> degree_tiebreak(const CommGraph& graph) {
  std::map<NodeId, double> out;
  for (const NodeId id : graph.node_ids()) out[id] = -static_cast<double>(graph.degree(id));
  return out;
}

CommGraph attach_virtual_node(const CommGraph& graph, const std::vector<NodeId>& key_nodes) {
  if (graph.has_vn()) throw InvalidState("virtual node already attached");
  if (key_nodes.empty()) throw InvalidArgument("virtual node needs at least one key node");
  std::set<NodeId> keys;
  for (const NodeId id : key_nodes) {
    if (id.is_virtual() || !graph.contains(id)) {
      throw InvalidArgument("unknown key node " + to_string(id));
    }
    keys.insert(id);
  }
  CommGraph out = graph;
  out.nodes_.insert(out.nodes_.begin(), kVirtualNode);
  out.adjacency_[kVirtualNode] = keys;
  for (const NodeId id : keys) out.adjacency_[id].insert(kVirtualNode);
  out.has_vn_ = true;
  out.vn_neighbors_ = keys;
  return out;
}

double total_line_length(const CommGraph& graph, const FarmLayout& layout) {
  double total = 0.0;
  for (const auto& [u, v] : graph.edges()) {
    if (u.is_virtual() || v.is_virtual()) continue;
    total += layout.distance(u, v);
  }
  return total;
}

std::size_t WeightMatrix::index_of(NodeId id) const {
  const auto it = std::lower_bound(order.begin(), order.end(), id);
  if (it == order.end() || *it != id) throw InvalidArgument("node " + to_string(id) + " not in weight matrix");
  return static_cast<std::size_t>(it - order.begin());
}

WeightMatrix metropolis_weights(const CommGraph& graph) {
  if (!is_connected(graph)) throw InvalidArgument("consensus weights need a connected graph");
  WeightMatrix w;
  w.order = graph.node_ids();
  const auto n = static_cast<Eigen::Index>(w.order.size());
  w.weights = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [u, v] : graph.edges()) {
    const double value = 1.0 / (1.0 + static_cast<double>(std::max(graph.degree(u), graph.degree(v))));
    const auto i = static_cast<Eigen::Index>(w.index_of(u));
    const auto j = static_cast<Eigen::Index>(w.index_of(v));
    w.weights(i, j) = value;
    w.weights(j, i) = value;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) off += w.weights(i, j);
    }
    w.weights(i, i) = 1.0 - off;
  }
  return w;
}

std::string graph_to_csv(const CommGraph& graph, const FarmLayout& layout) {
  std::string out = "u,v,length_km\n";
  for (const auto& [u, v] : graph.edges()) {
    if (u.is_virtual() || v.is_virtual()) continue;
    out += to_string(u) + "," + to_string(v) + "," + text::format_double(layout.distance(u, v)) + "\n";
  }
  if (graph.has_vn()) {
    std::vector<std::string> ids;
    for (const NodeId id : graph.vn_neighbors()) ids.push_back(to_string(id));
    out += "vn_neighbors:" + text::join(ids, ";") + "\n";
  }
  return out;
}

}  // namespace aggwind
