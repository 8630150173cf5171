#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gridtop/common.hpp"
#include "gridtop/document.hpp"

namespace gridtop {

// Internal node indexing: nodes are remapped to dense 0-based slots with the
// reference node always at slot 0. Reduced matrices drop slot 0, so reduced
// index r corresponds to slot r+1.

struct NetworkEdge {
  int u = 0;           // endpoint slots, u < v
  int v = 0;
  double susceptance = 0.0;
  bool existing = false;
};

class PowerNetwork {
 public:
  int node_count() const { return static_cast<int>(external_ids_.size()); }  // N+1
  int reduced_count() const { return node_count() - 1; }                     // N

  const std::vector<NetworkEdge>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const NetworkEdge& edge(int e) const { return edges_.at(e); }
  double reactance(int e) const { return 1.0 / edges_.at(e).susceptance; }

  std::vector<int> existing_edges() const;
  bool has_existing_edges() const;

  double inertia(int slot) const { return inertia_.at(slot); }
  double damping(int slot) const { return damping_.at(slot); }
  bool synchronous(int slot) const { return !zero_injection_.at(slot); }
  bool uniform_damping(double rel_tol = 1e-9) const;

  int external_id(int slot) const { return external_ids_.at(slot); }
  int slot_of(int external_id) const;
  int reference_id() const { return external_ids_.at(0); }

  friend PowerNetwork build_network(const NetworkDocument& doc);

 private:
  std::vector<int> external_ids_;  // slot -> document id, reference first
  std::vector<double> inertia_;
  std::vector<double> damping_;
  std::vector<uint8_t> zero_injection_;
  std::vector<NetworkEdge> edges_;
};

struct EdgeSelection {
  std::vector<double> values;
  bool relaxed = false;

  static EdgeSelection all_ones(int edge_count);
  static EdgeSelection from_edges(int edge_count, const std::vector<int>& edge_ids);
  static EdgeSelection from_mask(int edge_count, std::uint32_t mask);
  std::uint32_t to_mask() const;
  std::vector<int> selected_edges() const;
  int cardinality() const;
};

PowerNetwork build_network(const NetworkDocument& doc);

// Row of the reduced branch-bus incidence matrix (length N, entries in
// {0,+1,-1}, reference slot dropped).
Eigen::VectorXd incidence_row(const PowerNetwork& net, int edge);

Eigen::MatrixXd reduced_laplacian(const PowerNetwork& net, const EdgeSelection& selection);
Eigen::MatrixXd reduced_laplacian(const PowerNetwork& net, const std::vector<int>& edge_ids);

// Full (N+1)x(N+1) susceptance Laplacian in slot order.
Eigen::MatrixXd full_laplacian(const PowerNetwork& net, const EdgeSelection& selection);

struct CriticalEdge {
  int edge = -1;
  // Connected components of (V, E_hat \ {edge}); the first one contains the
  // reference node. Entries are node slots.
  std::vector<int> reference_side;
  std::vector<int> far_side;
};

// Bridges of the candidate graph: exactly the edges whose removal disconnects
// (V, E_hat). Each comes with its two components.
std::vector<CriticalEdge> find_critical_edges(const PowerNetwork& net);

// All-pairs shortest path reactances over the given edge subset
// (Floyd-Warshall). Result is (N+1)x(N+1) in slot order, with row/col 0 the
// reference node; unreachable pairs are +infinity.
Eigen::MatrixXd shortest_path_reactances(const PowerNetwork& net, const std::vector<int>& edge_ids);

bool is_connected(const PowerNetwork& net, const EdgeSelection& selection);
bool is_connected_mask(const PowerNetwork& net, std::uint32_t mask);

// Minimum total-reactance spanning tree over the candidate set (Kruskal,
// lexicographic tie-break). Throws if the candidate graph does not span.
std::vector<int> min_reactance_spanning_tree(const PowerNetwork& net);

}  // namespace gridtop
