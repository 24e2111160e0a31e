#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gie/bie.hpp"
#include "gie/funcspace.hpp"

namespace gie {

using SourceFn = std::function<double(double u, const Point3& grad_u, const Point3& X)>;

// -Lap u = psi1(u, grad u, X) in the domain, u = A1 on the boundary.
struct SemilinearProblem {
  SurfaceMesh mesh;
  VolumeGrid grid;
  BoundaryField A1;
  std::vector<Point3> A1_gradient;  // ambient gradient at the nodes; optional
  SourceFn psi1;
  bool uses_gradient = true;  // false: grad u is only evaluated for the final state
  double lipschitz_u = 0.0;
  double lipschitz_grad = 0.0;
  double M = 10.0;
  std::vector<double> epsilon_schedule;  // decreasing, absolute
  int m1 = 10;                           // negative-norm order (Laplacian: 6 + 2a with a = 2)
};

// {0.2, 0.1, 0.05, 0.025} * h^2 with h the largest cell size
std::vector<double> default_epsilon_schedule(const VolumeGrid& grid);

// sup-norm bound of psi1 -> (u, grad u) for one sweep: Lip_u r^2/2 + Lip_grad r,
// r the radius of the ball with the domain's volume
double contraction_estimate(const SemilinearProblem& p);

struct IterateState {
  GridFunction u, u_x, u_y, u_z;
  BoundaryField A5;
  double residual_negnorm = 0.0;
  double residual_inf = 0.0;
  // the same fields on the cells of the volume grid
  Eigen::VectorXd cell_u;
  std::vector<Point3> cell_grad;
  CompletedBoundaryData boundary;  // filled when A1_gradient is given
};

struct IterationRecord {
  double epsilon = 0.0;
  int iter = 0;
  double residual_inf = 0.0;     // sup of the update
  double residual_negnorm = 0.0;  // negative norm of the update
};

// one row per epsilon: residual of the converged iterate against the
// unmollified operator
struct EpsilonRecord {
  double epsilon = 0.0;
  int iterations = 0;
  double residual_inf = 0.0;
  double residual_negnorm = 0.0;
  double contraction = 0.0;
  bool converged = false;
};

struct SolverHistory {
  std::vector<IterationRecord> iterations;
  std::vector<EpsilonRecord> levels;
  double initial_residual_inf = 0.0;  // same residual at u = 0
  double initial_residual_negnorm = 0.0;
  bool diverged = false;
  std::string status = "ok";
};

struct SemilinearOptions {
  bool best_effort = false;
  bool throw_on_divergence = true;
};

struct SemilinearResult {
  IterateState state;
  SolverHistory history;
};

// max_outer bounds the fixed-point sweeps per epsilon
SemilinearResult solve_semilinear(const SemilinearProblem& p, double tol, int max_outer,
                                  const SemilinearOptions& opt = {});

struct ConvergenceRow {
  double epsilon, residual_inf, residual_negnorm, contraction;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool tail_monotone = true;  // each step within 5% of the previous
  double final_over_initial = 0.0;
  std::string status;
};

ConvergenceTable convergence_report(const SolverHistory& h);
nlohmann::json to_json(const ConvergenceTable& t);
// epsilon,iter,residual_inf,residual_negnorm
std::string history_csv(const SolverHistory& h);

}  // namespace gie
