#pragma once

#include <Eigen/LU>

#include "gie/potentials.hpp"

namespace gie {

// Nystrom discretization of (1/2 I - K') with K' the adjoint double layer
// kernel grad_X h(X - P).n_X, Newton convention.
struct NeumannSystem {
  SurfaceMesh mesh;
  Eigen::MatrixXd matrix;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double condition = 0.0;  // 1-norm estimate
  double fd_step = 0.0;    // normal offset used for g02
};

struct CompletedBoundaryData {
  BoundaryField A1, A2, A3, A4, A5;
  BoundaryField lambda;  // A5 - dA1/dn
};

NeumannSystem assemble_neumann_system(const SurfaceMesh& mesh, double max_condition = 1e8);

// Interior limit of the normal derivative of the Newton double layer of A1 at
// every node, by a one-sided second-order difference along -n.
BoundaryField double_layer_normal_derivative(const SurfaceMesh& mesh, const BoundaryField& A1, double step);

// Right-hand side g02 + dN[psi]/dn; grid/psi may be null.
BoundaryField neumann_rhs(const NeumannSystem& sys, const BoundaryField& A1, const VolumeGrid* grid = nullptr,
                          const Eigen::VectorXd* psi = nullptr);

BoundaryField solve_neumann_data(const NeumannSystem& sys, const BoundaryField& A1,
                                 const VolumeGrid* grid = nullptr, const Eigen::VectorXd* psi = nullptr);

CompletedBoundaryData tangential_complete(const SurfaceMesh& mesh, const std::vector<Point3>& A1_gradient,
                                          const BoundaryField& A1, const BoundaryField& A5);

// u(X) = S[A5] + D[A1] + N[psi1]. An empty psi1 drops the volume term.
double evaluate_representation(const SurfaceMesh& mesh, const VolumeGrid& grid, const BoundaryField& A1,
                               const BoundaryField& A5, const Eigen::VectorXd& psi1, const Point3& X);
double evaluate_representation(const SurfaceMesh& mesh, const BoundaryField& A1, const BoundaryField& A5,
                               const Point3& X);
Point3 evaluate_representation_gradient(const SurfaceMesh& mesh, const VolumeGrid& grid, const BoundaryField& A1,
                                        const BoundaryField& A5, const Eigen::VectorXd& psi1, const Point3& X);

}  // namespace gie
