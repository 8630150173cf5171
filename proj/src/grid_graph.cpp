#include "gridtop/grid_graph.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace gridtop {

namespace {

// Union-find over node slots.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

std::vector<int> PowerNetwork::existing_edges() const {
  std::vector<int> out;
  for (int e = 0; e < edge_count(); ++e)
    if (edges_[e].existing) out.push_back(e);
  return out;
}

bool PowerNetwork::has_existing_edges() const {
  return std::any_of(edges_.begin(), edges_.end(), [](const NetworkEdge& e) { return e.existing; });
}

bool PowerNetwork::uniform_damping(double rel_tol) const {
  double d0 = damping_.front();
  for (double d : damping_)
    if (std::abs(d - d0) > rel_tol * std::max(1.0, std::abs(d0))) return false;
  return true;
}

int PowerNetwork::slot_of(int external_id) const {
  for (int s = 0; s < node_count(); ++s)
    if (external_ids_[s] == external_id) return s;
  throw Error("unknown node id " + std::to_string(external_id));
}

EdgeSelection EdgeSelection::all_ones(int edge_count) {
  return {std::vector<double>(static_cast<size_t>(edge_count), 1.0), false};
}

EdgeSelection EdgeSelection::from_edges(int edge_count, const std::vector<int>& edge_ids) {
  EdgeSelection s{std::vector<double>(static_cast<size_t>(edge_count), 0.0), false};
  for (int e : edge_ids) s.values.at(e) = 1.0;
  return s;
}

EdgeSelection EdgeSelection::from_mask(int edge_count, std::uint32_t mask) {
  EdgeSelection s{std::vector<double>(static_cast<size_t>(edge_count), 0.0), false};
  for (int e = 0; e < edge_count; ++e)
    if (mask >> e & 1u) s.values[e] = 1.0;
  return s;
}

std::uint32_t EdgeSelection::to_mask() const {
  std::uint32_t m = 0;
  for (size_t e = 0; e < values.size(); ++e)
    if (values[e] > 0.5) m |= 1u << e;
  return m;
}

std::vector<int> EdgeSelection::selected_edges() const {
  std::vector<int> out;
  for (size_t e = 0; e < values.size(); ++e)
    if (values[e] > 0.5) out.push_back(static_cast<int>(e));
  return out;
}

int EdgeSelection::cardinality() const {
  return static_cast<int>(selected_edges().size());
}

PowerNetwork build_network(const NetworkDocument& doc) {
  if (doc.nodes.size() < 2) throw Error("network needs at least two nodes");

  PowerNetwork net;
  std::map<int, int> slot;  // external id -> slot
  bool have_reference = false;
  for (const DocumentNode& n : doc.nodes)
    if (n.id == doc.reference_node) have_reference = true;
  if (!have_reference)
    throw Error("reference node " + std::to_string(doc.reference_node) + " missing from node list");

  // Reference first, then the remaining nodes in document order.
  auto add_node = [&](const DocumentNode& n) {
    if (slot.count(n.id)) throw Error("duplicate node id " + std::to_string(n.id));
    if (!(n.inertia > 0.0))
      throw Error("nonpositive inertia at node " + std::to_string(n.id));
    if (!(n.damping > 0.0))
      throw Error("nonpositive damping at node " + std::to_string(n.id));
    slot[n.id] = static_cast<int>(net.external_ids_.size());
    net.external_ids_.push_back(n.id);
    net.inertia_.push_back(n.inertia);
    net.damping_.push_back(n.damping);
    net.zero_injection_.push_back(n.zero_injection ? 1 : 0);
  };
  for (const DocumentNode& n : doc.nodes)
    if (n.id == doc.reference_node) add_node(n);
  for (const DocumentNode& n : doc.nodes)
    if (n.id != doc.reference_node) add_node(n);

  std::set<std::pair<int, int>> seen;
  for (const DocumentEdge& de : doc.edges) {
    if (!slot.count(de.from) || !slot.count(de.to))
      throw Error("edge (" + std::to_string(de.from) + "," + std::to_string(de.to) +
                  ") references an unknown node");
    if (de.from == de.to)
      throw Error("self-loop at node " + std::to_string(de.from));
    if (!(de.susceptance > 0.0))
      throw Error("nonpositive susceptance on edge (" + std::to_string(de.from) + "," +
                  std::to_string(de.to) + ")");
    NetworkEdge e;
    e.u = slot[de.from];
    e.v = slot[de.to];
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.insert({e.u, e.v}).second)
      throw Error("duplicate edge (" + std::to_string(de.from) + "," + std::to_string(de.to) + ")");
    e.susceptance = de.susceptance;
    e.existing = de.existing;
    net.edges_.push_back(e);
  }
  if (net.edges_.empty()) throw Error("network has no candidate edges");

  DisjointSet ds(net.node_count());
  for (const NetworkEdge& e : net.edges_) ds.unite(e.u, e.v);
  for (int s = 1; s < net.node_count(); ++s)
    if (ds.find(s) != ds.find(0)) throw Error("candidate graph is disconnected");

  return net;
}

Eigen::VectorXd incidence_row(const PowerNetwork& net, int edge) {
  if (edge < 0 || edge >= net.edge_count()) throw Error("unknown edge index " + std::to_string(edge));
  const NetworkEdge& e = net.edge(edge);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(net.reduced_count());
  if (e.u == 0) {
    a[e.v - 1] = 1.0;  // reference endpoint dropped
  } else {
    a[e.u - 1] = 1.0;
    a[e.v - 1] = -1.0;
  }
  return a;
}

Eigen::MatrixXd reduced_laplacian(const PowerNetwork& net, const EdgeSelection& selection) {
  if (static_cast<int>(selection.values.size()) != net.edge_count())
    throw Error("selection length does not match candidate edge count");
  const int n = net.reduced_count();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int eidx = 0; eidx < net.edge_count(); ++eidx) {
    double z = selection.values[eidx];
    if (z == 0.0) continue;
    const NetworkEdge& e = net.edge(eidx);
    double w = z * e.susceptance;
    if (e.u == 0) {
      L(e.v - 1, e.v - 1) += w;
    } else {
      L(e.u - 1, e.u - 1) += w;
      L(e.v - 1, e.v - 1) += w;
      L(e.u - 1, e.v - 1) -= w;
      L(e.v - 1, e.u - 1) -= w;
    }
  }
  return L;
}

Eigen::MatrixXd reduced_laplacian(const PowerNetwork& net, const std::vector<int>& edge_ids) {
  EdgeSelection s = EdgeSelection::from_edges(net.edge_count(), edge_ids);
  return reduced_laplacian(net, s);
}

Eigen::MatrixXd full_laplacian(const PowerNetwork& net, const EdgeSelection& selection) {
  if (static_cast<int>(selection.values.size()) != net.edge_count())
    throw Error("selection length does not match candidate edge count");
  const int n = net.node_count();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int eidx = 0; eidx < net.edge_count(); ++eidx) {
    double z = selection.values[eidx];
    if (z == 0.0) continue;
    const NetworkEdge& e = net.edge(eidx);
    double w = z * e.susceptance;
    L(e.u, e.u) += w;
    L(e.v, e.v) += w;
    L(e.u, e.v) -= w;
    L(e.v, e.u) -= w;
  }
  return L;
}

std::vector<CriticalEdge> find_critical_edges(const PowerNetwork& net) {
  const int n = net.node_count();
  const int m = net.edge_count();

  // Adjacency with edge ids.
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge)
  for (int e = 0; e < m; ++e) {
    adj[net.edge(e).u].push_back({net.edge(e).v, e});
    adj[net.edge(e).v].push_back({net.edge(e).u, e});
  }

  // Iterative DFS lowlink bridge detection.
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<int> bridge_edges;
  int timer = 0;
  struct Frame {
    int node;
    int parent_edge;
    size_t next = 0;
  };
  std::vector<Frame> stack;
  stack.push_back({0, -1});
  disc[0] = low[0] = timer++;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < adj[f.node].size()) {
      auto [to, eid] = adj[f.node][f.next++];
      if (eid == f.parent_edge) continue;
      if (disc[to] == -1) {
        disc[to] = low[to] = timer++;
        stack.push_back({to, eid});
      } else {
        low[f.node] = std::min(low[f.node], disc[to]);
      }
    } else {
      int node = f.node;
      int pe = f.parent_edge;
      stack.pop_back();
      if (!stack.empty()) {
        int parent = stack.back().node;
        low[parent] = std::min(low[parent], low[node]);
        if (low[node] > disc[parent]) bridge_edges.push_back(pe);
      }
    }
  }
  std::sort(bridge_edges.begin(), bridge_edges.end());

  std::vector<CriticalEdge> out;
  for (int be : bridge_edges) {
    CriticalEdge ce;
    ce.edge = be;
    DisjointSet ds(n);
    for (int e = 0; e < m; ++e)
      if (e != be) ds.unite(net.edge(e).u, net.edge(e).v);
    int ref_root = ds.find(0);
    for (int s = 0; s < n; ++s) {
      if (ds.find(s) == ref_root)
        ce.reference_side.push_back(s);
      else
        ce.far_side.push_back(s);
    }
    out.push_back(std::move(ce));
  }
  return out;
}

Eigen::MatrixXd shortest_path_reactances(const PowerNetwork& net, const std::vector<int>& edge_ids) {
  const int n = net.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, inf);
  for (int i = 0; i < n; ++i) d(i, i) = 0.0;
  for (int e : edge_ids) {
    const NetworkEdge& ne = net.edge(e);
    double x = net.reactance(e);
    d(ne.u, ne.v) = std::min(d(ne.u, ne.v), x);
    d(ne.v, ne.u) = d(ne.u, ne.v);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (d(i, k) == inf) continue;
      for (int j = 0; j < n; ++j) {
        double via = d(i, k) + d(k, j);
        if (via < d(i, j)) d(i, j) = via;
      }
    }
  return d;
}

bool is_connected(const PowerNetwork& net, const EdgeSelection& selection) {
  if (selection.relaxed) throw Error("is_connected requires a binary selection");
  if (static_cast<int>(selection.values.size()) != net.edge_count())
    throw Error("selection length does not match candidate edge count");
  DisjointSet ds(net.node_count());
  int united = 0;
  for (int e = 0; e < net.edge_count(); ++e)
    if (selection.values[e] > 0.5 && ds.unite(net.edge(e).u, net.edge(e).v)) ++united;
  return united == net.node_count() - 1;
}

bool is_connected_mask(const PowerNetwork& net, std::uint32_t mask) {
  DisjointSet ds(net.node_count());
  int united = 0;
  for (int e = 0; e < net.edge_count(); ++e)
    if (mask >> e & 1u)
      if (ds.unite(net.edge(e).u, net.edge(e).v)) ++united;
  return united == net.node_count() - 1;
}

std::vector<int> min_reactance_spanning_tree(const PowerNetwork& net) {
  std::vector<int> order(net.edge_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return net.reactance(a) < net.reactance(b);
  });
  DisjointSet ds(net.node_count());
  std::vector<int> tree;
  for (int e : order)
    if (ds.unite(net.edge(e).u, net.edge(e).v)) tree.push_back(e);
  if (static_cast<int>(tree.size()) != net.node_count() - 1)
    throw Error("candidate graph does not span all nodes");
  std::sort(tree.begin(), tree.end());
  return tree;
}

}  // namespace gridtop
