#include <doctest.h>

#include <cmath>

#include "gie/errors.hpp"
#include "gie/hammerstein.hpp"

using namespace gie;

namespace {

HammersteinProblem constant_linear(double lambda, double c, double M, int n = 65) {
  HammersteinProblem p;
  p.domain = interval_domain(0, 1, n);
  p.k = [lambda](const Point3&, const Point3&) { return lambda; };
  p.psi = [](const Point3&, double s) { return s; };
  p.g = [c](const Point3&) { return c; };
  p.M = M;
  p.lipschitz = 1.0;
  return p;
}

// f* = cos x for a smooth kernel and psi = sin; g by fine Simpson quadrature
HammersteinProblem manufactured(int n) {
  HammersteinProblem p;
  p.domain = interval_domain(0, 1, n);
  p.k = [](const Point3& X, const Point3& Y) { return 0.5 * std::exp(-(X - Y).squaredNorm()); };
  p.psi = [](const Point3&, double s) { return std::sin(s); };
  p.g = [](const Point3& X) {
    const int m = 4000;
    const double h = 1.0 / m;
    double acc = 0;
    for (int i = 0; i <= m; ++i) {
      double y = i * h, w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
      acc += w * 0.5 * std::exp(-(X.x() - y) * (X.x() - y)) * std::sin(std::cos(y));
    }
    return std::cos(X.x()) - acc * h / 3;
  };
  p.M = 3;
  p.lipschitz = 1;
  return p;
}

}  // namespace

TEST_CASE("operator closed forms") {
  auto p = constant_linear(0.7, 0.0, 2.0);
  const auto n = static_cast<Eigen::Index>(p.domain.size());
  CHECK(p.domain.measure() == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::VectorXd Tf = apply_operator(p, Eigen::VectorXd::Ones(n));
  CHECK((Tf.array() - 0.7).abs().maxCoeff() <= 1e-12);

  auto z = p;
  z.psi = [](const Point3&, double) { return 0.0; };
  CHECK(apply_operator(z, Eigen::VectorXd::Ones(n)).isZero());
  CHECK_THROWS_AS(apply_operator(p, Eigen::VectorXd::Constant(n, 3.0)), RadiusExceeded);
  CHECK_THROWS_AS(apply_operator(p, Eigen::VectorXd::Ones(n - 1)), LengthMismatch);

  auto s = p;
  s.k = [](const Point3& X, const Point3& Y) { return std::cos(X.x()) * (1 + Y.x()); };
  Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(n, -1, 1);
  Eigen::VectorXd r = apply_operator(s, f);
  double c = 0;
  for (Eigen::Index j = 0; j < n; ++j) c += s.domain.weights[static_cast<std::size_t>(j)] * (1 + s.domain.nodes[static_cast<std::size_t>(j)].x()) * f[j];
  for (Eigen::Index i = 0; i < n; ++i) CHECK(r[i] == doctest::Approx(std::cos(s.domain.nodes[static_cast<std::size_t>(i)].x()) * c).epsilon(1e-12));
}

TEST_CASE("Picard closed forms") {
  auto p = constant_linear(0.5, 1.0, 5.0);
  auto sol = picard_solve(p, 1e-12, 1000);
  CHECK(sol.certified);
  CHECK((sol.values.array() - 2.0).abs().maxCoeff() <= 1e-11);
  CHECK(sol.residual_inf <= 1e-12);

  auto z = constant_linear(0.5, 0.0, 1.0);
  auto zs = picard_solve(z, 1e-12, 1000);
  CHECK(zs.iterations <= 1);
  CHECK(zs.values.isZero());

  CHECK_THROWS_AS(picard_solve(constant_linear(2.0, 1.0, 1.0), 1e-10, 100), NoContraction);
  PicardOptions be;
  be.best_effort = true;
  CHECK_THROWS_AS(picard_solve(constant_linear(2.0, 1.0, 10.0), 1e-10, 100, be), MaxIterations);
}

TEST_CASE("manufactured solution converges at second order") {
  std::vector<double> err;
  for (int n : {17, 33, 65, 129}) {
    auto p = manufactured(n);
    auto sol = picard_solve(p, 1e-13, 1000);
    double e = 0;
    for (std::size_t i = 0; i < p.domain.size(); ++i)
      e = std::max(e, std::abs(sol.values[static_cast<Eigen::Index>(i)] - std::cos(p.domain.nodes[i].x())));
    err.push_back(e);
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(std::log2(err[i - 1] / err[i]) >= 1.9);
}

TEST_CASE("contraction gives a unique fixed point") {
  auto p = manufactured(33);
  const double tol = 1e-11;
  PicardOptions a, b;
  a.initial = Eigen::VectorXd::Constant(33, 2.5);
  b.initial = Eigen::VectorXd::Constant(33, -2.5);
  auto sa = picard_solve(p, tol, 1000, a), sb = picard_solve(p, tol, 1000, b);
  CHECK((sa.values - sb.values).cwiseAbs().maxCoeff() <= 10 * tol);
}

TEST_CASE("tau estimate") {
  auto p = constant_linear(0.0, 0.0, 1.5);
  CHECK(estimate_tau(p, 50, 1) == 1.5);

  auto q = constant_linear(0.4, 0.0, 1.0);
  const double ratio = contraction_bound(q);
  CHECK(ratio == doctest::Approx(0.4));
  CHECK(estimate_tau(q, 100, 2) >= q.M * (1 - ratio) * 0.99);
  CHECK(estimate_tau(q, 100, 9) == estimate_tau(q, 100, 9));
  CHECK_THROWS_AS(estimate_tau(q, 0, 1), PreconditionViolated);
}

TEST_CASE("problem files") {
  nlohmann::json j = {{"domain", {{"type", "interval"}, {"a", 0}, {"b", 1}, {"n", 33}}},
                      {"kernel", {{"family", "constant"}, {"lambda", 0.5}}},
                      {"psi", {{"family", "linear"}, {"a", 1}}},
                      {"g", {{"family", "constant"}, {"c", 1}}},
                      {"M", 5}};
  auto p = problem_from_json(j);
  CHECK(p.domain.size() == 33);
  CHECK(picard_solve(p, 1e-12, 500).values[3] == doctest::Approx(2.0));
  auto bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(problem_from_json(bad), InvalidSpec);
  bad = j;
  bad["kernel"]["family"] = "lua";
  CHECK_THROWS_AS(problem_from_json(bad), InvalidSpec);
  bad = j;
  bad.erase("M");
  CHECK_THROWS_AS(problem_from_json(bad), InvalidSpec);
}
