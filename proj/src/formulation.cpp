#include "gridtop/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace gridtop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int MilpModel::add_variable(std::string name, double lb, double ub, double obj, bool integer) {
  if (lb > ub) throw Error("variable '" + name + "' has empty bound interval");
  lb_.push_back(lb);
  ub_.push_back(ub);
  obj_.push_back(obj);
  integer_.push_back(integer ? 1 : 0);
  names_.push_back(std::move(name));
  return num_variables() - 1;
}

int MilpModel::add_constraint(Constraint c) {
  for (const LinearTerm& t : c.terms)
    if (t.var < 0 || t.var >= num_variables())
      throw Error("constraint '" + c.tag + "' references unknown variable");
  rows_.push_back(std::move(c));
  return num_constraints() - 1;
}

void MilpModel::set_bounds(int v, double lb, double ub) {
  if (lb > ub) throw Error("empty bound interval for " + names_.at(v));
  lb_.at(v) = lb;
  ub_.at(v) = ub;
}

std::vector<int> MilpModel::integer_variables() const {
  std::vector<int> out;
  for (int v = 0; v < num_variables(); ++v)
    if (integer_[v]) out.push_back(v);
  return out;
}

double MilpModel::evaluate_objective(const std::vector<double>& x) const {
  double s = 0.0;
  for (int v = 0; v < num_variables(); ++v) s += obj_[v] * x[v];
  return s;
}

double MilpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (const Constraint& c : rows_) {
    double lhs = 0.0;
    for (const LinearTerm& t : c.terms) lhs += t.coef * x[t.var];
    double viol = 0.0;
    switch (c.sense) {
      case Sense::le: viol = lhs - c.rhs; break;
      case Sense::ge: viol = c.rhs - lhs; break;
      case Sense::eq: viol = std::abs(lhs - c.rhs); break;
    }
    worst = std::max(worst, viol);
  }
  for (int v = 0; v < num_variables(); ++v) {
    worst = std::max(worst, lb_[v] - x[v]);
    worst = std::max(worst, x[v] - ub_[v]);
  }
  return worst;
}

std::uint64_t MilpModel::fingerprint() const {
  // FNV-1a over the canonical serialization, coefficients rounded.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  auto mixd = [&](double d) {
    double r = std::isfinite(d) ? std::round(d * 1e10) / 1e10 : d;
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(r));
    std::memcpy(&bits, &r, sizeof(bits));
    mix(bits);
  };
  for (int v = 0; v < num_variables(); ++v) {
    mixd(lb_[v]);
    mixd(ub_[v]);
    mixd(obj_[v]);
    mix(integer_[v]);
  }
  for (const Constraint& c : rows_) {
    mix(static_cast<std::uint64_t>(c.sense));
    mixd(c.rhs);
    for (const LinearTerm& t : c.terms) {
      mix(static_cast<std::uint64_t>(t.var));
      mixd(t.coef);
    }
  }
  return h;
}

void MilpModel::write_lp(std::ostream& os) const {
  auto var = [&](int v) { return names_[v].empty() ? "v" + std::to_string(v) : names_[v]; };
  os << "Minimize\n obj:";
  for (int v = 0; v < num_variables(); ++v)
    if (obj_[v] != 0.0) os << (obj_[v] >= 0 ? " + " : " - ") << std::abs(obj_[v]) << " " << var(v);
  os << "\nSubject To\n";
  int idx = 0;
  for (const Constraint& c : rows_) {
    os << " c" << idx++ << ":";
    for (const LinearTerm& t : c.terms)
      os << (t.coef >= 0 ? " + " : " - ") << std::abs(t.coef) << " " << var(t.var);
    os << (c.sense == Sense::le ? " <= " : c.sense == Sense::ge ? " >= " : " = ") << c.rhs << "\n";
  }
  os << "Bounds\n";
  for (int v = 0; v < num_variables(); ++v) {
    if (lb_[v] == -kInf && ub_[v] == kInf)
      os << " " << var(v) << " free\n";
    else if (lb_[v] == -kInf)
      os << " -inf <= " << var(v) << " <= " << ub_[v] << "\n";
    else if (ub_[v] == kInf)
      os << " " << var(v) << " >= " << lb_[v] << "\n";
    else
      os << " " << lb_[v] << " <= " << var(v) << " <= " << ub_[v] << "\n";
  }
  bool any_int = false;
  for (int v = 0; v < num_variables(); ++v) any_int = any_int || integer_[v];
  if (any_int) {
    os << "General\n";
    for (int v = 0; v < num_variables(); ++v)
      if (integer_[v]) os << " " << var(v) << "\n";
  }
  os << "End\n";
}

const char* to_string(BoundSource s) {
  switch (s) {
    case BoundSource::none: return "none";
    case BoundSource::lemma1: return "lemma1";
    case BoundSource::lemma2: return "lemma2";
    case BoundSource::cor1: return "cor1";
    case BoundSource::cor2: return "cor2";
    case BoundSource::lp_sweep: return "lp-sweep";
    case BoundSource::m_matrix: return "m-matrix";
    case BoundSource::naive: return "naive";
  }
  return "?";
}

BoundBox BoundBox::unbounded(int n) {
  BoundBox b;
  b.lower = Eigen::MatrixXd::Constant(n, n, -kInf);
  b.upper = Eigen::MatrixXd::Constant(n, n, kInf);
  b.lower_src.setConstant(n, n, static_cast<std::int8_t>(BoundSource::none));
  b.upper_src.setConstant(n, n, static_cast<std::int8_t>(BoundSource::none));
  return b;
}

bool BoundBox::finite_upper() const {
  return upper.allFinite();
}

void BoundBox::merge_lower(int i, int j, double value, BoundSource src) {
  if (value > lower(i, j)) {
    lower(i, j) = lower(j, i) = value;
    lower_src(i, j) = lower_src(j, i) = static_cast<std::int8_t>(src);
  }
}

void BoundBox::merge_upper(int i, int j, double value, BoundSource src) {
  if (value < upper(i, j)) {
    upper(i, j) = upper(j, i) = value;
    upper_src(i, j) = upper_src(j, i) = static_cast<std::int8_t>(src);
  }
}

bool BoundBox::contains(const Eigen::MatrixXd& X, double tol) const {
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j)
      if (X(i, j) < lower(i, j) - tol || X(i, j) > upper(i, j) + tol) return false;
  return true;
}

int GridModelLayout::x_entry(int i, int j) const {
  if (i > j) std::swap(i, j);
  return i * reduced_size - i * (i - 1) / 2 + (j - i);
}

std::optional<int> GridModelLayout::y_var(int e, int i, int j) const {
  int id = y_ids.at(static_cast<size_t>(e) * num_x() + x_entry(i, j));
  if (id < 0) return std::nullopt;
  return id;
}

std::array<Constraint, 4> mccormick_group(int y_id, int z_id, int x_id, double lower,
                                          double upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper))
    throw Error("bound tightening must run first: infinite bound in McCormick group");
  if (lower > upper) throw Error("McCormick group with empty bound interval");
  std::array<Constraint, 4> rows;
  // y >= lower * z
  rows[0] = Constraint{{{y_id, 1.0}, {z_id, -lower}}, Sense::ge, 0.0, "mc"};
  // y >= X + upper * z - upper
  rows[1] = Constraint{{{y_id, 1.0}, {x_id, -1.0}, {z_id, -upper}}, Sense::ge, -upper, "mc"};
  // y <= upper * z
  rows[2] = Constraint{{{y_id, 1.0}, {z_id, -upper}}, Sense::le, 0.0, "mc"};
  // y <= X + lower * z - lower
  rows[3] = Constraint{{{y_id, 1.0}, {x_id, -1.0}, {z_id, -lower}}, Sense::le, -lower, "mc"};
  return rows;
}

std::vector<Constraint> identity_constraints(const PowerNetwork& net, const GridModelLayout& layout,
                                             const std::vector<std::uint8_t>& fixed_edge) {
  const int n = net.reduced_count();
  std::vector<Constraint> rows;
  rows.reserve(static_cast<size_t>(n) * n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      Constraint c;
      c.sense = Sense::eq;
      c.rhs = (p == q) ? 1.0 : 0.0;
      c.tag = "identity(" + std::to_string(p) + "," + std::to_string(q) + ")";
      for (int e = 0; e < net.edge_count(); ++e) {
        const NetworkEdge& ne = net.edge(e);
        int ru = ne.u - 1, rv = ne.v - 1;  // reduced indices, -1 for the reference
        double ap = (ru == p) ? 1.0 : (rv == p) ? -1.0 : 0.0;
        if (ap == 0.0) continue;
        auto push = [&](int m, double am) {
          double coef = ne.susceptance * ap * am;
          if (fixed_edge[e]) {
            c.terms.push_back({layout.x_var(m, q), coef});
          } else {
            c.terms.push_back({*layout.y_var(e, m, q), coef});
          }
        };
        if (ru >= 0) push(ru, 1.0);
        if (rv >= 0) push(rv, -1.0);
      }
      // Merge duplicate variables (fixed edges can map two terms to one X).
      std::sort(c.terms.begin(), c.terms.end(),
                [](const LinearTerm& a, const LinearTerm& b) { return a.var < b.var; });
      std::vector<LinearTerm> merged;
      for (const LinearTerm& t : c.terms) {
        if (!merged.empty() && merged.back().var == t.var)
          merged.back().coef += t.coef;
        else
          merged.push_back(t);
      }
      c.terms = std::move(merged);
      rows.push_back(std::move(c));
    }
  }
  return rows;
}

Constraint budget_constraint(const PowerNetwork& net, int budget, DesignMode mode) {
  const int n = net.reduced_count();
  Constraint c;
  c.tag = "budget";
  for (int e = 0; e < net.edge_count(); ++e) c.terms.push_back({e, 1.0});
  switch (mode) {
    case DesignMode::radial:
      c.sense = Sense::eq;
      c.rhs = n;
      break;
    case DesignMode::meshed:
      if (budget < n) throw Error("infeasible: cannot span (budget K < N)");
      c.sense = Sense::le;
      c.rhs = budget;
      break;
    case DesignMode::augment: {
      if (budget < 0) throw Error("augment budget must be >= 0");
      int existing = static_cast<int>(net.existing_edges().size());
      c.sense = Sense::le;
      c.rhs = existing + budget;
      break;
    }
  }
  return c;
}

std::vector<Constraint> apriori_valid_inequalities(const ModelSpec& spec,
                                                   const GridModelLayout& layout) {
  const PowerNetwork& net = *spec.network;
  const int n = net.reduced_count();
  const Eigen::MatrixXd& Xf = spec.full_laplacian_inverse;
  std::vector<Constraint> rows;

  // (a) resistance of the full candidate graph lower-bounds every topology's.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double rf = Xf(i, i) + Xf(j, j) - 2.0 * Xf(i, j);
      Constraint c;
      c.sense = Sense::ge;
      c.rhs = rf;
      c.tag = "resistance_floor(" + std::to_string(i) + "," + std::to_string(j) + ")";
      c.terms = {{layout.x_var(i, i), 1.0}, {layout.x_var(j, j), 1.0}, {layout.x_var(i, j), -2.0}};
      rows.push_back(std::move(c));
    }

  // (b) critical edges are in every feasible topology; their pair's effective
  // resistance is capped by the edge reactance.
  for (const CriticalEdge& ce : spec.critical_edges) {
    const NetworkEdge& e = net.edge(ce.edge);
    double cap = spec.dhat(e.u, e.v) + spec.epsilon;
    int ru = e.u - 1, rv = e.v - 1;
    Constraint c;
    c.sense = Sense::le;
    c.rhs = cap;
    c.tag = "critical_cap(" + std::to_string(ce.edge) + ")";
    if (ru < 0) {
      c.terms = {{layout.x_var(rv, rv), 1.0}};
    } else {
      c.terms = {{layout.x_var(ru, ru), 1.0}, {layout.x_var(rv, rv), 1.0},
                 {layout.x_var(ru, rv), -2.0}};
    }
    rows.push_back(std::move(c));
  }

  // (c) inverse M-matrix: diagonal dominates every row entry.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Constraint c;
      c.sense = Sense::ge;
      c.rhs = 0.0;
      c.tag = "m_matrix(" + std::to_string(i) + "," + std::to_string(j) + ")";
      c.terms = {{layout.x_var(i, i), 1.0}, {layout.x_var(i, j), -1.0}};
      rows.push_back(std::move(c));
    }
  return rows;
}

GridMilp assemble(const ModelSpec& spec, const BoundBox& bounds,
                  const std::vector<Constraint>& extra_cuts) {
  const PowerNetwork& net = *spec.network;
  const int n = net.reduced_count();
  const int ne = net.edge_count();

  GridMilp gm;
  gm.layout.reduced_size = n;
  gm.layout.edge_count = ne;
  gm.fixed_edge.assign(ne, 0);
  if (spec.mode == DesignMode::augment)
    for (int e = 0; e < ne; ++e)
      if (net.edge(e).existing) gm.fixed_edge[e] = 1;

  MilpModel& m = gm.model;

  // z block.
  for (int e = 0; e < ne; ++e) {
    double lb = gm.fixed_edge[e] ? 1.0 : 0.0;
    m.add_variable("z_" + std::to_string(e), lb, 1.0, 0.0, !gm.fixed_edge[e]);
  }
  if (!spec.naive)
    for (const CriticalEdge& ce : spec.critical_edges) m.set_bounds(ce.edge, 1.0, 1.0);

  // X block: objective trace(W X) over the upper triangle.
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double lo = bounds.lower(i, j), hi = bounds.upper(i, j);
      if (!std::isfinite(lo) || !std::isfinite(hi))
        throw Error("bound tightening must run first: infinite bound on X entry");
      double w = (i == j) ? spec.reduced_weights(i, i)
                          : spec.reduced_weights(i, j) + spec.reduced_weights(j, i);
      m.add_variable("X_" + std::to_string(i) + "_" + std::to_string(j), lo, hi, w, false);
    }

  // y block, canonical order: edge, endpoint, column.
  gm.layout.y_ids.assign(static_cast<size_t>(ne) * gm.layout.num_x(), -1);
  for (int e = 0; e < ne; ++e) {
    if (gm.fixed_edge[e]) continue;
    const NetworkEdge& edge = net.edge(e);
    for (int endpoint : {edge.u - 1, edge.v - 1}) {
      if (endpoint < 0) continue;
      for (int q = 0; q < n; ++q) {
        size_t key = static_cast<size_t>(e) * gm.layout.num_x() + gm.layout.x_entry(endpoint, q);
        if (gm.layout.y_ids[key] >= 0) continue;
        int xe = gm.layout.x_entry(endpoint, q);
        int lo_i = std::min(endpoint, q), hi_j = std::max(endpoint, q);
        double xlo = bounds.lower(lo_i, hi_j), xhi = bounds.upper(lo_i, hi_j);
        gm.layout.y_ids[key] = m.add_variable(
            "y_" + std::to_string(e) + "_" + std::to_string(xe), std::min(0.0, xlo),
            std::max(0.0, xhi), 0.0, false);
      }
    }
  }

  for (Constraint& c : identity_constraints(net, gm.layout, gm.fixed_edge))
    m.add_constraint(std::move(c));

  for (int e = 0; e < ne; ++e) {
    if (gm.fixed_edge[e]) continue;
    const NetworkEdge& edge = net.edge(e);
    for (int endpoint : {edge.u - 1, edge.v - 1}) {
      if (endpoint < 0) continue;
      for (int q = 0; q < n; ++q) {
        auto y = gm.layout.y_var(e, endpoint, q);
        int lo_i = std::min(endpoint, q), hi_j = std::max(endpoint, q);
        // The (endpoint, q) and (q, endpoint) loops alias one y; emit once.
        if (endpoint > q && (edge.u - 1 == q || edge.v - 1 == q)) continue;
        for (Constraint& c :
             mccormick_group(*y, gm.layout.z_var(e), gm.layout.x_var(endpoint, q),
                             bounds.lower(lo_i, hi_j), bounds.upper(lo_i, hi_j)))
          m.add_constraint(std::move(c));
      }
    }
  }

  m.add_constraint(budget_constraint(net, spec.budget, spec.mode));

  if (!spec.naive)
    for (Constraint& c : apriori_valid_inequalities(spec, gm.layout)) m.add_constraint(std::move(c));

  for (const Constraint& c : extra_cuts) m.add_constraint(c);
  return gm;
}

}  // namespace gridtop
