#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gie/hammerstein.hpp"
#include "gie/polynomial.hpp"

namespace gie {

// C(N+3, 3): monomials of total degree <= N in three variables
long basis_size(int N);
// C(N+dim, dim); interval domains only carry the x monomials
long basis_size(int N, int dim);

// Monomials X^alpha, |alpha| <= N, in graded lexicographic order. They are
// evaluated in the scaled coordinates t = (X - center) / half_width so that
// the fits stay well conditioned; the span is the same.
struct MonomialBasis {
  int N = 0;
  int dim = 3;
  std::vector<Exponent> multi_indices;
  Point3 center = Point3::Zero();
  Point3 half_width = Point3::Ones();

  std::size_t size() const { return multi_indices.size(); }
  Eigen::VectorXd evaluate(const Point3& X) const;
  // rows: evaluate(X_i)
  Eigen::MatrixXd design(const std::vector<Point3>& pts) const;
};

MonomialBasis make_basis(int N, int dim = 3, const Point3& lo = -Point3::Ones(), const Point3& hi = Point3::Ones());

struct PolynomialFit {
  MonomialBasis basis;
  Eigen::VectorXd coefficients;
  double sup_error = 0.0;  // on the validation grid
  int training_points_per_axis = 0;
  int validation_points_per_axis = 0;
};

// Least squares on a tensor training grid with >= 3(N+1) points per axis;
// sup error on a denser grid shifted off the training nodes.
PolynomialFit fit_polynomial_approximation(const std::function<double(const Point3&)>& func, const Point3& lo,
                                           const Point3& hi, int dim, int N);
std::vector<Point3> training_grid(const Point3& lo, const Point3& hi, int dim, int per_axis);
std::vector<Point3> validation_grid(const Point3& lo, const Point3& hi, int dim, int per_axis);

// D -> D - phi(D) - target on the open set {D : gauge(D) < 1}; gauge must be
// positively homogeneous and convex.
struct FiniteMap {
  int dim = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> phi;
  std::function<double(const Eigen::VectorXd&)> gauge;
  Eigen::VectorXd g;  // the target of the Hammerstein pipeline
};

// phi_alpha(D) = sum_j w_j C_alpha(Y_j) psi(Y_j, X~_j^T D); gauge = max_j |X~_j^T D| / M.
FiniteMap build_finite_map(const HammersteinProblem& p, const Eigen::MatrixXd& kernel_coeffs,
                           const MonomialBasis& basis, const Eigen::VectorXd& g_coeffs);

enum class DegreeMethod { Auto, BoundarySign1D, JacobianSignSum, GridHomotopy };
std::string to_string(DegreeMethod m);

struct DegreeOptions {
  DegreeMethod method = DegreeMethod::Auto;
  int boundary_samples = 2000;
  int starts_per_dim = 40;
  int homotopy_steps = 40;
  unsigned seed = 11;
};

struct DegreeResult {
  int degree = 0;
  DegreeMethod method = DegreeMethod::Auto;
  std::vector<Eigen::VectorXd> roots;  // roots found by the Jacobian method
  double boundary_min = 0.0;           // min |F| on the sampled boundary
  int boundary_samples = 0;
  std::string cross_check;  // "agree", "inconclusive", "n/a"
};

DegreeResult brouwer_degree(const FiniteMap& map, const Eigen::VectorXd& target, const DegreeOptions& opt = {});

// (sign F(b) - sign F(a)) / 2; throws BoundaryZero if F vanishes at an endpoint
int degree_on_interval(const std::function<double(double)>& F, double a, double b);

struct DegreeCertificate {
  int degree = 0;
  double tau_estimate = 0.0;
  int N = 0;
  long L_N = 0;
  double sup_error_kernel = 0.0;      // sup|k - k_N| sup|psi| m(domain)
  double sup_error_kernel_raw = 0.0;  // sup|k - k_N|
  double sup_error_offset = 0.0;
  DegreeMethod method = DegreeMethod::Auto;
  std::string cross_check;
  int boundary_samples = 0;
  int tau_samples = 0;
  int training_points_per_axis = 0;
  int validation_points_per_axis = 0;
  unsigned seed = 0;
  MonomialBasis basis;
  std::vector<Eigen::VectorXd> roots;
  Eigen::VectorXd g_coeffs;
};

DegreeCertificate leray_schauder_degree(const HammersteinProblem& p, int N, int samples, unsigned seed,
                                        const DegreeOptions& opt = {});

NystromSolution existence_from_degree(const DegreeCertificate& cert, const HammersteinProblem& p, double tol = 1e-10,
                                      int max_iter = 2000);

nlohmann::json to_json(const DegreeCertificate& c);

}  // namespace gie
