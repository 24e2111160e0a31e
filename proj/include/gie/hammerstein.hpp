#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gie/geometry.hpp"

namespace gie {

// Quadrature nodes and weights on a bounded domain. dim counts the
// coordinates that vary (1: x only, 3: full space).
struct Domain {
  std::vector<Point3> nodes;
  std::vector<double> weights;
  int dim = 1;
  Point3 lo = Point3::Zero(), hi = Point3::Zero();  // bounding box

  std::size_t size() const { return nodes.size(); }
  double measure() const;
};

// trapezoid rule on [a, b] with n nodes
Domain interval_domain(double a, double b, int n);
Domain grid_domain(const VolumeGrid& grid);

using KernelFn = std::function<double(const Point3& X, const Point3& Y)>;
using NonlinearityFn = std::function<double(const Point3& Y, double s)>;
using OffsetFn = std::function<double(const Point3& X)>;

// f = g + T f,  (T f)(X) = int k(X, Y) psi(Y, f(Y)) dY
struct HammersteinProblem {
  Domain domain;
  KernelFn k;
  NonlinearityFn psi;
  OffsetFn g;
  double M = 1.0;
  double lipschitz = 0.0;  // of psi in s on [-M, M]

  // w_j k(X_i, Y_j), built on first use
  const Eigen::MatrixXd& nystrom_matrix() const;
  Eigen::VectorXd offset() const;

 private:
  // dropped on copy, since the copy may swap k
  struct Cache {
    std::shared_ptr<Eigen::MatrixXd> K;
    Cache() = default;
    Cache(const Cache&) {}
    Cache& operator=(const Cache&) {
      K.reset();
      return *this;
    }
  };
  mutable Cache cache_;
};

struct NystromSolution {
  std::vector<Point3> nodes;
  Eigen::VectorXd values;
  double residual_inf = 0.0;
  int iterations = 0;
  bool certified = false;  // contraction certificate held
  double contraction_bound = 0.0;
};

Eigen::VectorXd apply_operator(const HammersteinProblem& p, const Eigen::VectorXd& f);
double residual_inf(const HammersteinProblem& p, const Eigen::VectorXd& f);
// sup|k| Lip(psi) m(domain) over the quadrature nodes
double contraction_bound(const HammersteinProblem& p);

struct PicardOptions {
  bool best_effort = false;
  std::optional<Eigen::VectorXd> initial;
};

NystromSolution picard_solve(const HammersteinProblem& p, double tol, int max_iter, const PicardOptions& opt = {});

// Sampled upper bound on inf_{|f|_inf = M} |f - T f - g|_inf.
double estimate_tau(const HammersteinProblem& p, int samples, unsigned seed);

// Built-in families described by JSON:
//  {"domain": {"type": "interval", "a": 0, "b": 1, "n": 65},
//   "kernel": {"family": "constant|separable|gaussian", ...},
//   "psi": {"family": "linear|cubic|saturating", ...},
//   "g": {"family": "constant|cos|zero", ...}, "M": 1.0}
HammersteinProblem problem_from_json(const nlohmann::json& j);

}  // namespace gie
