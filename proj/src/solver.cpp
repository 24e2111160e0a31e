#include "gie/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gie/errors.hpp"

namespace gie {

std::vector<double> default_epsilon_schedule(const VolumeGrid& grid) {
  const double h = grid.h.maxCoeff();
  return {0.2 * h * h, 0.1 * h * h, 0.05 * h * h, 0.025 * h * h};
}

double contraction_estimate(const SemilinearProblem& p) {
  const double r = std::cbrt(3.0 * p.grid.volume() / (4.0 * std::numbers::pi));
  return p.lipschitz_u * r * r / 2.0 + p.lipschitz_grad * r;
}

namespace {

struct Sweep {
  Eigen::VectorXd u;
  std::vector<Point3> grad;
  BoundaryField A5;
};

// Everything except the single layer of A5 is linear in the source or fixed
// by A1, so it is tabulated once per probe.
class Evaluator {
 public:
  Evaluator(const SemilinearProblem& p) : p_(p), sys_(assemble_neumann_system(p.mesh)) {
    const std::size_t n = p.grid.size();
    const auto ni = static_cast<Eigen::Index>(n);
    const auto nb = static_cast<Eigen::Index>(p.mesh.size());
    probe_.resize(n);
    c0_.resize(ni);
    g0_.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
      const Point3& X = p.grid.centers[c];
      int a = nearest_node(p.mesh, X);
      // centres sitting on the surface are pulled slightly inside
      probe_[c] = distance_to_surface(p.mesh, X) <= 2e-3 * p.mesh.spacing[a]
                      ? Point3(X - 1e-2 * p.mesh.spacing[a] * p.mesh.normals[a])
                      : X;
      a = nearest_node(p.mesh, probe_[c]);
      // D[1] = 1 inside, so only the deviation from the nearest value is integrated
      BoundaryField dev = p.A1.array() - p.A1[a];
      c0_[static_cast<Eigen::Index>(c)] = double_layer_eval(p.mesh, dev, probe_[c], Eval::Off) + p.A1[a];
      g0_[c] = double_layer_gradient(p.mesh, dev, probe_[c]);
    }

    a0_ = solve_neumann_data(sys_, p.A1, nullptr, nullptr);
    Eigen::MatrixXd rhs(nb, ni);
    for (Eigen::Index i = 0; i < nb; ++i) {
      const auto k = static_cast<std::size_t>(i);
      rhs.row(i) = p.mesh.normals[k].transpose() * newton_gradient_weights(p.grid, p.mesh.nodes[k]);
    }
    R_ = sys_.lu.solve(rhs);
    R_ += sys_.lu.solve(rhs - sys_.matrix * R_);

    dense_ = n <= kDenseCells;
    dense_grad_ = dense_ && p.uses_gradient;
    if (dense_) {
      N_.resize(ni, ni);
      if (dense_grad_)
        for (auto& G : Ng_) G.resize(ni, ni);
      for (Eigen::Index c = 0; c < ni; ++c) {
        const Point3& X = probe_[static_cast<std::size_t>(c)];
        N_.row(c) = newton_weights(p.grid, X).transpose();
        if (!dense_grad_) continue;
        Eigen::Matrix3Xd w = newton_gradient_weights(p.grid, X);
        for (int d = 0; d < 3; ++d) Ng_[d].row(c) = w.row(d);
      }
    }
  }

  // one application of the (mollified) fixed-point map, then projection to M
  Sweep apply(const Eigen::VectorXd& u, const std::vector<Point3>& grad, double eps, bool with_grad) const {
    const auto n = static_cast<Eigen::Index>(p_.grid.size());
    Eigen::VectorXd s(n);
    for (Eigen::Index c = 0; c < n; ++c) {
      auto k = static_cast<std::size_t>(c);
      s[c] = p_.psi1(u[c], grad[k], p_.grid.centers[k]);
    }
    if (!s.allFinite()) throw DivergenceDetected("source is not finite");
    if (eps > 0.0) s = to_volume_grid(mollify(from_volume_grid(p_.grid, s), eps), p_.grid);

    Sweep out;
    out.A5 = a0_ + R_ * s;
    Eigen::VectorXd vol = dense_ ? Eigen::VectorXd(N_ * s) : Eigen::VectorXd();
    std::array<Eigen::VectorXd, 3> gvol;
    if (with_grad && dense_grad_)
      for (int d = 0; d < 3; ++d) gvol[d] = Ng_[d] * s;
    out.u.resize(n);
    out.grad.assign(static_cast<std::size_t>(n), Point3::Zero());
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto k = static_cast<std::size_t>(c);
      const Point3& X = probe_[k];
      double v = c0_[c] + single_layer_eval(p_.mesh, out.A5, X, Eval::Off) +
                 (dense_ ? vol[c] : newton_potential(p_.grid, s, X));
      out.u[c] = std::clamp(v, -p_.M, p_.M);
      if (with_grad) {
        Point3 g = g0_[k] + single_layer_gradient(p_.mesh, out.A5, X);
        g += dense_grad_ ? Point3(gvol[0][c], gvol[1][c], gvol[2][c]) : newton_gradient(p_.grid, s, X);
        out.grad[k] = g.cwiseMax(-p_.M).cwiseMin(p_.M);
      }
    }
    return out;
  }

  double negnorm(const Eigen::VectorXd& cells) const { return negative_norm(from_volume_grid(p_.grid, cells), p_.m1); }

 private:
  static constexpr std::size_t kDenseCells = 6000;

  const SemilinearProblem& p_;
  NeumannSystem sys_;
  std::vector<Point3> probe_;
  Eigen::VectorXd c0_;
  std::vector<Point3> g0_;
  BoundaryField a0_;
  Eigen::MatrixXd R_;  // source -> A5
  bool dense_ = false;
  bool dense_grad_ = false;
  Eigen::MatrixXd N_;
  std::array<Eigen::MatrixXd, 3> Ng_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double grad_update(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

SemilinearResult solve_semilinear(const SemilinearProblem& p, double tol, int max_outer, const SemilinearOptions& opt) {
  if (static_cast<std::size_t>(p.A1.size()) != p.mesh.size()) throw LengthMismatch("A1 length != node count");
  if (!p.A1.allFinite()) throw PreconditionViolated("A1 must be finite");
  if (!p.psi1) throw PreconditionViolated("psi1 is not set");
  if (p.epsilon_schedule.empty()) throw PreconditionViolated("empty epsilon schedule");
  for (std::size_t i = 0; i < p.epsilon_schedule.size(); ++i)
    if (!(p.epsilon_schedule[i] > 0.0) || (i > 0 && p.epsilon_schedule[i] >= p.epsilon_schedule[i - 1]))
      throw PreconditionViolated("epsilon schedule must be positive and decreasing");
  if (max_outer < 1) throw PreconditionViolated("max_outer must be >= 1");
  const double q = contraction_estimate(p);
  if (q >= 1.0 && !opt.best_effort) throw NoContraction("contraction estimate " + std::to_string(q) + " >= 1");

  Evaluator ev(p);
  const auto n = static_cast<Eigen::Index>(p.grid.size());
  const bool wg = p.uses_gradient;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  std::vector<Point3> grad(static_cast<std::size_t>(n), Point3::Zero());
  BoundaryField A5 = BoundaryField::Zero(static_cast<Eigen::Index>(p.mesh.size()));

  SemilinearResult res;
  SolverHistory& H = res.history;
  {
    Sweep t0 = ev.apply(u, grad, 0.0, wg);
    H.initial_residual_inf = std::max(inf_norm(t0.u - u), wg ? grad_update(t0.grad, grad) : 0.0);
    H.initial_residual_negnorm = ev.negnorm(t0.u - u);
  }

  int growth = 0;
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : p.epsilon_schedule) {
    EpsilonRecord lvl;
    lvl.epsilon = eps;
    std::vector<double> updates;
    for (int it = 1; it <= max_outer; ++it) {
      Sweep s = ev.apply(u, grad, eps, wg);
      if (inf_norm(s.u) > p.M) throw Error("projection failed");
      IterationRecord r;
      r.epsilon = eps;
      r.iter = it;
      r.residual_inf = std::max(inf_norm(s.u - u), wg ? grad_update(s.grad, grad) : 0.0);
      r.residual_negnorm = ev.negnorm(s.u - u);
      H.iterations.push_back(r);
      updates.push_back(r.residual_inf);
      u = s.u;
      grad = s.grad;
      A5 = s.A5;
      lvl.iterations = it;

      growth = r.residual_inf > prev ? growth + 1 : 0;
      prev = r.residual_inf;
      if (growth >= 3) {
        H.diverged = true;
        H.status = "DivergenceDetected";
        if (opt.throw_on_divergence) throw DivergenceDetected("update grew in 3 consecutive sweeps");
        break;
      }
      if (r.residual_inf <= tol) {
        lvl.converged = true;
        break;
      }
    }
    // geometric mean of the last few update ratios
    double lr = 0.0;
    int cnt = 0;
    for (std::size_t i = updates.size() > 3 ? updates.size() - 3 : 1; i < updates.size(); ++i)
      if (updates[i - 1] > 0.0 && updates[i] > 0.0) {
        lr += std::log(updates[i] / updates[i - 1]);
        ++cnt;
      }
    lvl.contraction = cnt ? std::exp(lr / cnt) : 0.0;

    Sweep t0 = ev.apply(u, grad, 0.0, wg);
    lvl.residual_inf = std::max(inf_norm(t0.u - u), wg ? grad_update(t0.grad, grad) : 0.0);
    lvl.residual_negnorm = ev.negnorm(t0.u - u);
    H.levels.push_back(lvl);
    if (H.diverged) break;
    if (!lvl.converged && H.status == "ok") H.status = "MaxIterations";
  }

  IterateState& st = res.state;
  if (!wg) {
    Sweep s = ev.apply(u, grad, p.epsilon_schedule.back(), true);
    grad = s.grad;
  }
  st.cell_u = u;
  st.cell_grad = grad;
  st.A5 = A5;
  st.u = from_volume_grid(p.grid, u);
  Eigen::VectorXd gx(n), gy(n), gz(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& g = grad[static_cast<std::size_t>(c)];
    gx[c] = g.x();
    gy[c] = g.y();
    gz[c] = g.z();
  }
  st.u_x = from_volume_grid(p.grid, gx);
  st.u_y = from_volume_grid(p.grid, gy);
  st.u_z = from_volume_grid(p.grid, gz);
  if (!H.levels.empty()) {
    st.residual_inf = H.levels.back().residual_inf;
    st.residual_negnorm = H.levels.back().residual_negnorm;
  }
  if (p.A1_gradient.size() == p.mesh.size()) st.boundary = tangential_complete(p.mesh, p.A1_gradient, p.A1, A5);
  return res;
}

ConvergenceTable convergence_report(const SolverHistory& h) {
  if (h.levels.empty() && h.iterations.empty()) throw PreconditionViolated("empty history");
  ConvergenceTable t;
  t.status = h.status;
  for (const auto& l : h.levels) t.rows.push_back({l.epsilon, l.residual_inf, l.residual_negnorm, l.contraction});
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.rows[i].residual_negnorm > 1.05 * t.rows[i - 1].residual_negnorm) t.tail_monotone = false;
  if (!t.rows.empty() && h.initial_residual_negnorm > 0.0)
    t.final_over_initial = t.rows.back().residual_negnorm / h.initial_residual_negnorm;
  return t;
}

nlohmann::json to_json(const ConvergenceTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"epsilon", r.epsilon},
                    {"residual_inf", r.residual_inf},
                    {"residual_negnorm", r.residual_negnorm},
                    {"contraction", r.contraction}});
  return {{"rows", rows},
          {"tail_monotone", t.tail_monotone},
          {"final_over_initial", t.final_over_initial},
          {"status", t.status}};
}

std::string history_csv(const SolverHistory& h) {
  std::ostringstream os;
  os.precision(17);
  os << "epsilon,iter,residual_inf,residual_negnorm\n";
  for (const auto& r : h.iterations) os << r.epsilon << ',' << r.iter << ',' << r.residual_inf << ',' << r.residual_negnorm << '\n';
  return os.str();
}

}  // namespace gie
