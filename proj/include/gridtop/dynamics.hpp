#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gridtop/grid_graph.hpp"

namespace gridtop {

// Pairwise angle weights plus frequency weights. W is the (N+1)x(N+1)
// Laplacian of the weight graph in slot order; the coherence preset is
// W = I - 11^T/(N+1), S = 0.
class StabilityObjective {
 public:
  enum class Preset { coherence, custom };

  static StabilityObjective coherence(int node_count);
  static StabilityObjective custom(const PowerNetwork& net, const std::vector<AngleWeight>& w,
                                   const std::vector<FrequencyWeight>& s);
  static StabilityObjective from_document(const PowerNetwork& net, const ObjectiveSpec& spec);

  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::VectorXd& s() const { return s_; }
  Preset preset() const { return preset_; }
  bool frequency_weighted() const { return s_.cwiseAbs().maxCoeff() > 0.0; }

  // W with the reference row/column dropped.
  Eigen::MatrixXd reduced_W() const;

 private:
  StabilityObjective() = default;
  Eigen::MatrixXd W_;
  Eigen::VectorXd s_;
  Preset preset_ = Preset::coherence;
};

struct StateSpace {
  Eigen::MatrixXd A;  // 2(N+1) x 2(N+1)
  Eigen::MatrixXd B;  // 2(N+1) x (N+1)
  Eigen::MatrixXd C;  // 2(N+1) x 2(N+1)
};

StateSpace state_matrices(const PowerNetwork& net, const EdgeSelection& selection,
                          const StabilityObjective& objective);

struct GramianResult {
  Eigen::MatrixXd Q;
  double h2_squared = 0.0;
  double residual = 0.0;  // ||A^T Q + Q A + C^T C|| relative to ||C^T C||
};

// Observability Gramian of (A, C) with the rigid-body angle-shift mode
// deflated, and the squared H2 norm trace(B^T Q B). The average-angle mode
// must be unobservable (C [1;0] = 0), which holds whenever W is a Laplacian.
GramianResult observability_gramian(const StateSpace& ss);

// trace(W_red * L_red^{-1}); throws "disconnected topology" on singular input.
double closed_form_objective(const Eigen::MatrixXd& W_red, const Eigen::MatrixXd& L_red);

// Schur complement onto `keep` (0-based reduced indices, ascending).
Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& L_red, const std::vector<int>& keep);

struct ImpulseEnergyOptions {
  double horizon = 50.0;  // auto-doubled until outputs decay to 1e-6 of peak
  double step = 1e-3;
  int max_extensions = 16;
};

// Sum over input channels of the impulse-response output energy, by explicit
// RK4 integration. Validation path for the Gramian value.
double impulse_energy_estimate(const StateSpace& ss, const ImpulseEnergyOptions& opts = {});

}  // namespace gridtop
