#include "gie/bie.hpp"

#include <cmath>
#include <numbers>

#include "gie/errors.hpp"

namespace gie {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// mean of -2 (P_j - P_i).n_i / |P_j - P_i|^2; 1/R on a sphere of radius R
double adjoint_curvature(const SurfaceMesh& m, int i) {
  double s = 0.0;
  for (int j : m.node_nbrs[i]) {
    Point3 r = m.nodes[j] - m.nodes[i];
    s -= 2.0 * r.dot(m.normals[i]) / r.squaredNorm();
  }
  return m.node_nbrs[i].empty() ? 0.0 : s / static_cast<double>(m.node_nbrs[i].size());
}

void check_length(const SurfaceMesh& m, const BoundaryField& v, const char* what) {
  if (static_cast<std::size_t>(v.size()) != m.size())
    throw LengthMismatch(std::string(what) + " length does not match node count");
}

}  // namespace

NeumannSystem assemble_neumann_system(const SurfaceMesh& mesh, double max_condition) {
  if (mesh.size() < 12) throw InvalidMesh("need at least 12 nodes");
  if (!is_watertight(mesh)) throw InvalidMesh("mesh is not watertight");
  const auto n = static_cast<Eigen::Index>(mesh.size());
  NeumannSystem sys;
  sys.mesh = mesh;
  sys.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point3& Pi = mesh.nodes[i];
    const Point3& ni = mesh.normals[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      Point3 r = mesh.nodes[j] - Pi;
      double d = r.norm();
      sys.matrix(i, j) = -mesh.weights[j] * r.dot(ni) / (kFourPi * d * d * d);
    }
    // K' ~ -kappa/(8 pi r) near the node; its integral over the self disk is -kappa rho/4
    double rho = std::sqrt(mesh.weights[i] / std::numbers::pi);
    sys.matrix(i, i) = 0.5 + 0.25 * adjoint_curvature(mesh, static_cast<int>(i)) * rho;
  }
  sys.lu.compute(sys.matrix);
  double rc = sys.lu.rcond();
  sys.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(sys.condition <= max_condition))
    throw IllConditioned("Neumann system condition estimate " + std::to_string(sys.condition));
  sys.fd_step = 2.0 * mesh.mean_spacing();
  return sys;
}

BoundaryField double_layer_normal_derivative(const SurfaceMesh& m, const BoundaryField& A1, double step) {
  check_length(m, A1, "A1");
  BoundaryField g(A1.size());
  BoundaryField shifted(A1.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    shifted = A1.array() - A1[ii];
    const Point3& P = m.nodes[i];
    const Point3& n = m.normals[i];
    double f0 = double_layer_eval(m, shifted, P, Eval::OnSurface);
    double f1 = double_layer_eval(m, shifted, P - step * n, Eval::Off);
    double f2 = double_layer_eval(m, shifted, P - 2.0 * step * n, Eval::Off);
    g[ii] = (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * step);
  }
  return g;
}

BoundaryField neumann_rhs(const NeumannSystem& sys, const BoundaryField& A1, const VolumeGrid* grid,
                          const Eigen::VectorXd* psi) {
  BoundaryField rhs = double_layer_normal_derivative(sys.mesh, A1, sys.fd_step);
  if (grid && psi && psi->size() > 0) {
    for (std::size_t i = 0; i < sys.mesh.size(); ++i)
      rhs[static_cast<Eigen::Index>(i)] += sys.mesh.normals[i].dot(newton_gradient(*grid, *psi, sys.mesh.nodes[i]));
  }
  return rhs;
}

BoundaryField solve_neumann_data(const NeumannSystem& sys, const BoundaryField& A1, const VolumeGrid* grid,
                                 const Eigen::VectorXd* psi) {
  BoundaryField rhs = neumann_rhs(sys, A1, grid, psi);
  BoundaryField x = sys.lu.solve(rhs);
  x += sys.lu.solve(rhs - sys.matrix * x);  // one refinement step
  return x;
}

CompletedBoundaryData tangential_complete(const SurfaceMesh& m, const std::vector<Point3>& grad,
                                          const BoundaryField& A1, const BoundaryField& A5) {
  check_length(m, A1, "A1");
  check_length(m, A5, "A5");
  if (grad.size() != m.size()) throw LengthMismatch("gradient length does not match node count");
  const auto n = static_cast<Eigen::Index>(m.size());
  CompletedBoundaryData c;
  c.A1 = A1;
  c.A5 = A5;
  c.A2.resize(n);
  c.A3.resize(n);
  c.A4.resize(n);
  c.lambda.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point3& nu = m.normals[i];
    double lam = A5[i] - grad[i].dot(nu);
    c.lambda[i] = lam;
    c.A2[i] = grad[i].x() + lam * nu.x();
    c.A3[i] = grad[i].y() + lam * nu.y();
    c.A4[i] = grad[i].z() + lam * nu.z();
  }
  return c;
}

namespace {

// nearest node, rejecting probes that sit on the surface
int anchor_node(const SurfaceMesh& m, const Point3& X) {
  int t = -1;
  double d = distance_to_surface(m, X, &t);
  int a = nearest_node(m, X);
  if (d <= 1e-3 * m.spacing[a]) throw SingularEvaluation("probe lies on the boundary");
  return a;
}

}  // namespace

double evaluate_representation(const SurfaceMesh& m, const VolumeGrid& grid, const BoundaryField& A1,
                               const BoundaryField& A5, const Eigen::VectorXd& psi1, const Point3& X) {
  double u = evaluate_representation(m, A1, A5, X);
  if (psi1.size() > 0) u += newton_potential(grid, psi1, X);
  return u;
}

double evaluate_representation(const SurfaceMesh& m, const BoundaryField& A1, const BoundaryField& A5,
                               const Point3& X) {
  check_length(m, A1, "A1");
  check_length(m, A5, "A5");
  int a = anchor_node(m, X);
  // D[1] = 1 inside, so only the deviation from the nearest value is integrated
  BoundaryField dev = A1.array() - A1[a];
  return single_layer_eval(m, A5, X, Eval::Off) + double_layer_eval(m, dev, X, Eval::Off) + A1[a];
}

Point3 evaluate_representation_gradient(const SurfaceMesh& m, const VolumeGrid& grid, const BoundaryField& A1,
                                        const BoundaryField& A5, const Eigen::VectorXd& psi1, const Point3& X) {
  check_length(m, A1, "A1");
  check_length(m, A5, "A5");
  int a = anchor_node(m, X);
  BoundaryField dev = A1.array() - A1[a];
  Point3 g = single_layer_gradient(m, A5, X) + double_layer_gradient(m, dev, X);
  if (psi1.size() > 0) g += newton_gradient(grid, psi1, X);
  return g;
}

}  // namespace gie
