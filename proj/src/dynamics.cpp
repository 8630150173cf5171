#include "gridtop/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace gridtop {

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  Eigen::VectorXd d = es.eigenvalues();
  for (int i = 0; i < d.size(); ++i) d[i] = d[i] < 1e-12 ? 0.0 : std::sqrt(d[i]);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// Solves T^H Q + Q T = M columnwise for upper-triangular complex T.
Eigen::MatrixXcd triangular_lyapunov(const Eigen::MatrixXcd& T, const Eigen::MatrixXcd& M) {
  const int n = static_cast<int>(T.rows());
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd rhs = M.col(k);
    for (int j = 0; j < k; ++j) rhs -= T(j, k) * Q.col(j);
    // (T^H + T_kk I) is lower triangular; forward substitution.
    for (int i = 0; i < n; ++i) {
      std::complex<double> acc = rhs(i);
      for (int j = 0; j < i; ++j) acc -= std::conj(T(j, i)) * Q(j, k);
      std::complex<double> piv = std::conj(T(i, i)) + T(k, k);
      if (std::abs(piv) < 1e-14)
        throw Error("Lyapunov solve failed: eigenvalue pair summing to zero (system not Hurwitz)");
      Q(i, k) = acc / piv;
    }
  }
  return Q;
}

}  // namespace

StabilityObjective StabilityObjective::coherence(int node_count) {
  StabilityObjective o;
  const double n = node_count;
  o.W_ = Eigen::MatrixXd::Identity(node_count, node_count) -
         Eigen::MatrixXd::Constant(node_count, node_count, 1.0 / n);
  o.s_ = Eigen::VectorXd::Zero(node_count);
  o.preset_ = Preset::coherence;
  return o;
}

StabilityObjective StabilityObjective::custom(const PowerNetwork& net,
                                              const std::vector<AngleWeight>& w,
                                              const std::vector<FrequencyWeight>& s) {
  const int n = net.node_count();
  StabilityObjective o;
  o.W_ = Eigen::MatrixXd::Zero(n, n);
  o.s_ = Eigen::VectorXd::Zero(n);
  o.preset_ = Preset::custom;

  std::vector<int> comp(n);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (comp[a] != a) a = comp[a] = comp[comp[a]];
    return a;
  };
  for (const AngleWeight& aw : w) {
    if (aw.weight < 0) throw Error("angle weight must be >= 0");
    if (aw.weight == 0) continue;
    int i = net.slot_of(aw.i), j = net.slot_of(aw.j);
    if (i == j) throw Error("angle weight on a single node");
    o.W_(i, i) += aw.weight;
    o.W_(j, j) += aw.weight;
    o.W_(i, j) -= aw.weight;
    o.W_(j, i) -= aw.weight;
    comp[find(i)] = find(j);
  }
  for (int v = 0; v < n; ++v)
    if (find(v) != find(0)) throw Error("weight graph must be connected");
  for (const FrequencyWeight& fw : s) {
    if (fw.weight < 0) throw Error("frequency weight must be >= 0");
    o.s_(net.slot_of(fw.i)) = fw.weight;
  }
  return o;
}

StabilityObjective StabilityObjective::from_document(const PowerNetwork& net,
                                                     const ObjectiveSpec& spec) {
  if (spec.coherence) return coherence(net.node_count());
  return custom(net, spec.w, spec.s);
}

Eigen::MatrixXd StabilityObjective::reduced_W() const {
  const int n = static_cast<int>(W_.rows());
  return W_.bottomRightCorner(n - 1, n - 1);
}

StateSpace state_matrices(const PowerNetwork& net, const EdgeSelection& selection,
                          const StabilityObjective& objective) {
  const int n = net.node_count();
  Eigen::VectorXd Minv(n), D(n);
  for (int i = 0; i < n; ++i) {
    if (!(net.inertia(i) > 0)) throw Error("nonpositive inertia");
    if (!(net.damping(i) > 0)) throw Error("nonpositive damping");
    Minv[i] = 1.0 / net.inertia(i);
    D[i] = net.damping(i);
  }
  Eigen::MatrixXd L = full_laplacian(net, selection);

  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.A.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  ss.A.bottomLeftCorner(n, n) = -(Minv.asDiagonal() * L);
  ss.A.bottomRightCorner(n, n) = -(Minv.cwiseProduct(D)).asDiagonal().toDenseMatrix();

  ss.B = Eigen::MatrixXd::Zero(2 * n, n);
  ss.B.bottomRows(n) = Minv.asDiagonal().toDenseMatrix();

  ss.C = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.C.topLeftCorner(n, n) = psd_sqrt(objective.W());
  Eigen::VectorXd s_sqrt = objective.s().cwiseMax(0.0).cwiseSqrt();
  ss.C.bottomRightCorner(n, n) = s_sqrt.asDiagonal().toDenseMatrix();
  return ss;
}

GramianResult observability_gramian(const StateSpace& ss) {
  const int two_n = static_cast<int>(ss.A.rows());
  const int n = two_n / 2;

  // Rigid-body mode [1;0]: must be dynamically invariant and unobservable.
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(two_n);
  v0.head(n).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  if ((ss.C * v0).norm() > 1e-9 * std::max(1.0, ss.C.norm()))
    throw Error("average-angle mode is observable; W must be a Laplacian");

  // Orthonormal basis of 1-perp for the angle block, identity on frequencies.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd V = Qfull.rightCols(n - 1);  // V^T 1 = 0

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(two_n, two_n - 1);
  P.topLeftCorner(n, n - 1) = V;
  P.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd Ared = P.transpose() * ss.A * P;
  Eigen::MatrixXd Cred = ss.C * P;

  Eigen::ComplexSchur<Eigen::MatrixXd> schur(Ared);
  if (schur.info() != Eigen::Success) throw Error("Schur decomposition failed");
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  for (int i = 0; i < T.rows(); ++i)
    if (T(i, i).real() >= -1e-12)
      throw Error("Lyapunov solve failed: deflated system is not Hurwitz (eigenvalue " +
                  std::to_string(T(i, i).real()) + ")");

  Eigen::MatrixXcd M = -(U.adjoint() * (Cred.transpose() * Cred) * U);
  Eigen::MatrixXcd Qt = triangular_lyapunov(T, M);
  Eigen::MatrixXd Qred = (U * Qt * U.adjoint()).real();
  Qred = 0.5 * (Qred + Qred.transpose());

  GramianResult res;
  res.Q = P * Qred * P.transpose();
  Eigen::MatrixXd ctc = ss.C.transpose() * ss.C;
  Eigen::MatrixXd resid = ss.A.transpose() * res.Q + res.Q * ss.A + ctc;
  res.residual = resid.norm() / std::max(1e-300, ctc.norm());
  if (res.residual > 1e-8)
    throw Error("Lyapunov residual " + std::to_string(res.residual) + " exceeds tolerance");
  res.h2_squared = (ss.B.transpose() * res.Q * ss.B).trace();
  return res;
}

double closed_form_objective(const Eigen::MatrixXd& W_red, const Eigen::MatrixXd& L_red) {
  const int n = static_cast<int>(L_red.rows());
  if (W_red.norm() == 0.0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(L_red);
  if (llt.info() != Eigen::Success) throw Error("disconnected topology");
  Eigen::MatrixXd X = llt.solve(Eigen::MatrixXd::Identity(n, n));
  if ((L_red * X - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-6)
    throw Error("disconnected topology");
  return (W_red * X).trace();
}

Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& L_red, const std::vector<int>& keep) {
  const int n = static_cast<int>(L_red.rows());
  std::vector<bool> keep_mask(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw Error("kron_reduce: index out of range");
    keep_mask[k] = true;
  }
  std::vector<int> drop;
  for (int i = 0; i < n; ++i)
    if (!keep_mask[i]) drop.push_back(i);
  if (drop.empty()) return L_red;

  const int ns = static_cast<int>(keep.size());
  const int nd = static_cast<int>(drop.size());
  Eigen::MatrixXd Lss(ns, ns), Lsd(ns, nd), Ldd(nd, nd);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) Lss(i, j) = L_red(keep[i], keep[j]);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nd; ++j) Lsd(i, j) = L_red(keep[i], drop[j]);
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j < nd; ++j) Ldd(i, j) = L_red(drop[i], drop[j]);

  Eigen::LLT<Eigen::MatrixXd> llt(Ldd);
  if (llt.info() != Eigen::Success) throw Error("kron_reduce: singular interior block");
  Eigen::MatrixXd S = Lss - Lsd * llt.solve(Lsd.transpose());
  if ((Ldd * llt.solve(Eigen::MatrixXd::Identity(nd, nd)) - Eigen::MatrixXd::Identity(nd, nd))
          .cwiseAbs()
          .maxCoeff() > 1e-6)
    throw Error("kron_reduce: singular interior block");
  return S;
}

double impulse_energy_estimate(const StateSpace& ss, const ImpulseEnergyOptions& opts) {
  const int channels = static_cast<int>(ss.B.cols());
  const Eigen::MatrixXd& A = ss.A;
  const Eigen::MatrixXd CtC = ss.C.transpose() * ss.C;
  if (CtC.norm() == 0.0) return 0.0;

  double total = 0.0;
  for (int ch = 0; ch < channels; ++ch) {
    double horizon = opts.horizon;
    int extensions = 0;
    while (true) {
      Eigen::VectorXd x = ss.B.col(ch);
      double energy = 0.0;
      double peak = 0.0, tail = 0.0;
      const double h = opts.step;
      const long steps = static_cast<long>(horizon / h);
      const long tail_start = steps - std::max<long>(1, steps / 20);
      for (long s = 0; s < steps; ++s) {
        double y2 = x.dot(CtC * x);
        peak = std::max(peak, y2);
        if (s >= tail_start) tail = std::max(tail, y2);
        // RK4 on the state with Simpson-consistent energy accumulation.
        Eigen::VectorXd k1 = A * x;
        Eigen::VectorXd k2 = A * (x + 0.5 * h * k1);
        Eigen::VectorXd k3 = A * (x + 0.5 * h * k2);
        Eigen::VectorXd k4 = A * (x + h * k3);
        Eigen::VectorXd xm = x + 0.5 * h * k1;  // midpoint sample (uses k1 slope)
        Eigen::VectorXd x_next = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
        double y2_mid = xm.dot(CtC * xm);
        double y2_next = x_next.dot(CtC * x_next);
        energy += (h / 6.0) * (y2 + 4.0 * y2_mid + y2_next);
        x = x_next;
      }
      // Decay criterion on ||y||^2: 1e-6 of peak output norm is 1e-12 in energy.
      if (tail <= 1e-12 * peak || peak == 0.0) {
        total += energy;
        break;
      }
      if (++extensions > opts.max_extensions)
        throw Error("impulse response not decayed within horizon; increase the horizon");
      horizon *= 2.0;
    }
  }
  return total;
}

}  // namespace gridtop
