#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridtop/grid_graph.hpp"

namespace gridtop {

enum class Sense : char { le = 'L', ge = 'G', eq = 'E' };

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
  std::string tag;
};

// Generic LP/MILP container consumed by the solver backend. Variables are
// created in a canonical order so that fingerprints are reproducible.
class MilpModel {
 public:
  int add_variable(std::string name, double lb, double ub, double obj, bool integer);
  int add_constraint(Constraint c);

  int num_variables() const { return static_cast<int>(lb_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }

  double lower(int v) const { return lb_.at(v); }
  double upper(int v) const { return ub_.at(v); }
  double objective(int v) const { return obj_.at(v); }
  bool is_integer(int v) const { return integer_.at(v) != 0; }
  const std::string& name(int v) const { return names_.at(v); }
  const Constraint& row(int i) const { return rows_.at(i); }
  const std::vector<Constraint>& constraints() const { return rows_; }

  void set_bounds(int v, double lb, double ub);
  void set_objective_coefficient(int v, double c) { obj_.at(v) = c; }

  std::vector<int> integer_variables() const;

  double evaluate_objective(const std::vector<double>& x) const;
  // Largest constraint violation of x over all rows (unscaled).
  double max_violation(const std::vector<double>& x) const;

  std::uint64_t fingerprint() const;
  void write_lp(std::ostream& os) const;  // CPLEX LP text format

 private:
  std::vector<double> lb_, ub_, obj_;
  std::vector<std::uint8_t> integer_;
  std::vector<std::string> names_;
  std::vector<Constraint> rows_;
};

// Entrywise bounds on the symmetric inverse-Laplacian matrix X, with the
// provenance of each side kept for the bounds report.
enum class BoundSource : std::int8_t {
  none,
  lemma1,
  lemma2,
  cor1,
  cor2,
  lp_sweep,
  m_matrix,
  naive,
};

const char* to_string(BoundSource s);

struct BoundBox {
  Eigen::MatrixXd lower, upper;
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> lower_src, upper_src;

  static BoundBox unbounded(int n);
  bool finite_upper() const;
  // Entrywise merge keeping the provenance of whichever side wins.
  void merge_lower(int i, int j, double value, BoundSource src);
  void merge_upper(int i, int j, double value, BoundSource src);
  bool contains(const Eigen::MatrixXd& X, double tol) const;
};

// Canonical variable layout of the grid design MILP: z block, then the upper
// triangle of X row-major, then the McCormick auxiliaries.
struct GridModelLayout {
  int reduced_size = 0;    // N
  int edge_count = 0;      // |E_hat|
  std::vector<int> y_ids;  // dense map (edge * nx + xentry) -> var, -1 if absent

  int num_x() const { return reduced_size * (reduced_size + 1) / 2; }
  int x_entry(int i, int j) const;  // 0-based reduced indices, unordered
  int z_var(int e) const { return e; }
  int x_var(int i, int j) const { return edge_count + x_entry(i, j); }
  std::optional<int> y_var(int e, int i, int j) const;
};

struct GridMilp {
  MilpModel model;
  GridModelLayout layout;
  std::vector<std::uint8_t> fixed_edge;  // substituted edges (y == X)
};

// Inputs to assembly; the engine fills this from a DesignProblem.
struct ModelSpec {
  const PowerNetwork* network = nullptr;
  DesignMode mode = DesignMode::meshed;
  int budget = 0;  // K for design modes, additional-line budget for augment
  double epsilon = 1e-6;
  Eigen::MatrixXd reduced_weights;         // W tilde
  Eigen::MatrixXd full_laplacian_inverse;  // L_f^{-1} (reduced indexing)
  std::vector<CriticalEdge> critical_edges;
  Eigen::MatrixXd dhat;  // shortest-path reactances over E_hat (slot indexing)
  bool naive = false;    // skip a-priori rows and critical fixing
};

// The four envelope inequalities linking y = z * X for given bounds.
std::array<Constraint, 4> mccormick_group(int y_id, int z_id, int x_id, double lower, double upper);

// Rows of L(z) X = I with the bilinear terms replaced by y (or by X directly
// for the fixed edges).
std::vector<Constraint> identity_constraints(const PowerNetwork& net, const GridModelLayout& layout,
                                             const std::vector<std::uint8_t>& fixed_edge);

Constraint budget_constraint(const PowerNetwork& net, int budget, DesignMode mode);

// (a) full-graph resistance lower bounds for all pairs, (b) critical-edge
// resistance caps, (c) inverse M-matrix rows X_ii >= X_ij.
std::vector<Constraint> apriori_valid_inequalities(const ModelSpec& spec,
                                                   const GridModelLayout& layout);

GridMilp assemble(const ModelSpec& spec, const BoundBox& bounds,
                  const std::vector<Constraint>& extra_cuts = {});

}  // namespace gridtop
