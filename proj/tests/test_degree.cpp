#include <doctest.h>

#include <cmath>
#include <random>

#include "gie/degree.hpp"
#include "gie/errors.hpp"

using namespace gie;

namespace {

HammersteinProblem make_problem(std::function<double(const Point3&, const Point3&)> k,
                                std::function<double(const Point3&, double)> psi, double c, double M, double lip,
                                int n = 65) {
  HammersteinProblem p;
  p.domain = interval_domain(0, 1, n);
  p.k = std::move(k);
  p.psi = std::move(psi);
  p.g = [c](const Point3&) { return c; };
  p.M = M;
  p.lipschitz = lip;
  return p;
}

HammersteinProblem constant_linear(double lambda, double c, double M) {
  return make_problem([lambda](const Point3&, const Point3&) { return lambda; },
                      [](const Point3&, double s) { return s; }, c, M, 1.0);
}

FiniteMap box_map(int L, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> phi, double R = 1.0) {
  FiniteMap m;
  m.dim = L;
  m.phi = std::move(phi);
  m.gauge = [R](const Eigen::VectorXd& D) { return D.cwiseAbs().maxCoeff() / R; };
  m.g = Eigen::VectorXd::Zero(L);
  return m;
}

Eigen::VectorXd zeros_like(const Eigen::VectorXd& D) { return Eigen::VectorXd::Zero(D.size()); }

}  // namespace

TEST_CASE("basis size and ordering") {
  CHECK(basis_size(0) == 1);
  CHECK(basis_size(2) == 10);
  CHECK(basis_size(3) == 20);
  CHECK(basis_size(3, 1) == 4);
  for (int N = 0; N <= 5; ++N) {
    auto b = make_basis(N);
    CHECK(static_cast<long>(b.size()) == basis_size(N));
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(GrlexLess{}(b.multi_indices[i - 1], b.multi_indices[i]));
  }
  CHECK_THROWS_AS(basis_size(-1), PreconditionViolated);
}

TEST_CASE("polynomial fits") {
  const Point3 lo(-1, -1, -1), hi(1, 1, 1);
  auto poly = [](const Point3& X) { return 1 - 2 * X.x() + X.y() * X.z() + 0.5 * X.x() * X.x(); };
  auto f3 = fit_polynomial_approximation(poly, lo, hi, 3, 2);
  CHECK(f3.sup_error <= 1e-9);
  CHECK(f3.training_points_per_axis >= 9);
  CHECK(f3.validation_points_per_axis > f3.training_points_per_axis);

  auto ex = [](const Point3& X) { return std::exp(X.x()); };
  CHECK(fit_polynomial_approximation(ex, lo, hi, 1, 4).sup_error <= 0.01);
  double prev = 1e300;
  for (int N = 1; N <= 4; ++N) {
    double e = fit_polynomial_approximation(ex, lo, hi, 1, N).sup_error;
    CHECK(e <= prev);
    prev = e;
  }
  // training and validation nodes never coincide
  auto tr = training_grid(lo, hi, 1, 12);
  auto va = validation_grid(lo, hi, 1, 48);
  for (const auto& a : tr)
    for (const auto& b : va) CHECK((a - b).norm() > 1e-12);
}

TEST_CASE("finite map structure") {
  auto p = constant_linear(0.5, 0.3, 2.0);
  auto basis = make_basis(0, 1, p.domain.lo, p.domain.hi);
  Eigen::MatrixXd C = Eigen::MatrixXd::Constant(1, static_cast<Eigen::Index>(p.domain.size()), 0.5);
  auto m = build_finite_map(p, C, basis, Eigen::VectorXd::Constant(1, 0.3));
  CHECK(m.phi(Eigen::VectorXd::Constant(1, 1.2))[0] == doctest::Approx(0.6).epsilon(1e-12));
  // d = g0 / (1 - lambda V) is a fixed point
  Eigen::VectorXd d = Eigen::VectorXd::Constant(1, 0.3 / 0.5);
  CHECK((d - m.phi(d) - m.g).norm() <= 1e-12);
  CHECK_THROWS_AS(m.phi(Eigen::VectorXd::Constant(1, 2.5)), RadiusExceeded);

  auto z = p;
  z.psi = [](const Point3&, double) { return 0.0; };
  auto mz = build_finite_map(z, C, basis, Eigen::VectorXd::Constant(1, 0.3));
  CHECK(mz.phi(Eigen::VectorXd::Constant(1, 1.0)).isZero());

  auto basis2 = make_basis(2, 1, p.domain.lo, p.domain.hi);
  Eigen::MatrixXd C2 = Eigen::MatrixXd::Random(3, static_cast<Eigen::Index>(p.domain.size()));
  auto ml = build_finite_map(p, C2, basis2, Eigen::VectorXd::Zero(3));
  Eigen::VectorXd a(3), b(3);
  a << 0.3, -0.2, 0.1;
  b << -0.1, 0.4, 0.2;
  Eigen::VectorXd lhs = ml.phi(0.7 * a + 0.2 * b), rhs = 0.7 * ml.phi(a) + 0.2 * ml.phi(b);
  CHECK((lhs - rhs).norm() <= 1e-9);
}

TEST_CASE("Brouwer degree oracles") {
  for (int L = 1; L <= 4; ++L) CHECK(brouwer_degree(box_map(L, zeros_like), Eigen::VectorXd::Zero(L)).degree == 1);
  auto neg = box_map(3, [](const Eigen::VectorXd& D) { return Eigen::VectorXd(2 * D); });
  CHECK(brouwer_degree(neg, Eigen::VectorXd::Zero(3)).degree == -1);
  auto sq = box_map(1, [](const Eigen::VectorXd& D) { return Eigen::VectorXd(D.array() - (D.array().square() - 1)); }, 2.0);
  CHECK(brouwer_degree(sq, Eigen::VectorXd::Zero(1)).degree == 0);

  CHECK_THROWS_AS(brouwer_degree(box_map(5, zeros_like), Eigen::VectorXd::Zero(5)), DimensionTooHigh);
  auto edge = box_map(1, zeros_like);
  CHECK_THROWS_AS(brouwer_degree(edge, Eigen::VectorXd::Ones(1)), BoundaryZero);
}

TEST_CASE("Jacobian sign sum in two dimensions") {
  // complex square: two simple roots inside the unit box
  auto csq = box_map(2, [](const Eigen::VectorXd& D) {
    Eigen::VectorXd F(2);
    F << D[0] * D[0] - D[1] * D[1], 2 * D[0] * D[1];
    return Eigen::VectorXd(D - F);
  });
  Eigen::VectorXd c(2);
  c << 0.1, 0.05;
  auto r = brouwer_degree(csq, c);
  CHECK(r.degree == 2);
  CHECK(r.roots.size() == 2);

  auto flip = box_map(2, [](const Eigen::VectorXd& D) {
    Eigen::VectorXd F(2);
    F << D[0], -D[1];
    return Eigen::VectorXd(D - F);
  });
  CHECK(brouwer_degree(flip, Eigen::VectorXd::Zero(2)).degree == -1);

  auto rot = box_map(2, [](const Eigen::VectorXd& D) {
    Eigen::VectorXd F(2);
    F << 0.5 * D[1], -0.5 * D[0];
    return F;
  });
  auto rr = brouwer_degree(rot, Eigen::VectorXd::Zero(2));
  CHECK(rr.degree == 1);
  CHECK(rr.cross_check == "agree");
}

TEST_CASE("normalization and additivity") {
  for (double R : {0.5, 1.0, 3.0}) {
    FiniteMap ball;
    ball.dim = 3;
    ball.phi = zeros_like;
    ball.gauge = [R](const Eigen::VectorXd& D) { return D.norm() / R; };
    CHECK(brouwer_degree(ball, Eigen::VectorXd::Zero(3)).degree == 1);
    CHECK(brouwer_degree(box_map(2, zeros_like, R), Eigen::VectorXd::Zero(2)).degree == 1);
  }
  auto F = [](double d) { return d * d - 1; };
  int whole = degree_on_interval(F, -2, 2), left = degree_on_interval(F, -2, 0), right = degree_on_interval(F, 0, 2);
  CHECK(whole == 0);
  CHECK(left == -1);
  CHECK(right == 1);
  CHECK(left + right == whole);
}

TEST_CASE("1D methods agree on random instances") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-1, 1);
  DegreeOptions jac;
  jac.method = DegreeMethod::JacobianSignSum;
  for (int t = 0; t < 20; ++t) {
    double c0 = 0.5 * U(rng), c1 = 2 * U(rng), c3 = 2 * U(rng);
    auto m = box_map(1, [=](const Eigen::VectorXd& D) {
      double d = D[0];
      return Eigen::VectorXd::Constant(1, d - (c0 + c1 * d + c3 * d * d * d));
    });
    int a = brouwer_degree(m, Eigen::VectorXd::Zero(1)).degree;
    int b = brouwer_degree(m, Eigen::VectorXd::Zero(1), jac).degree;
    CHECK(a == b);
  }
}

TEST_CASE("Leray-Schauder degree of contractions") {
  auto p = constant_linear(0.5, 0.2, 1.0);
  auto c = leray_schauder_degree(p, 0, 200, 3);
  CHECK(c.degree == 1);
  CHECK(c.L_N == 1);
  CHECK(c.sup_error_kernel <= c.tau_estimate / 3);
  CHECK(c.sup_error_offset <= c.tau_estimate / 3);
  auto sol = existence_from_degree(c, p);
  auto ref = picard_solve(p, 1e-10, 2000);
  CHECK((sol.values - ref.values).cwiseAbs().maxCoeff() <= 1e-9);

  auto gp = make_problem([](const Point3& X, const Point3& Y) { return 0.4 * std::exp(-(X - Y).squaredNorm() / 4); },
                         [](const Point3&, double s) { return std::tanh(s); }, 0.3, 1.0, 1.0);
  for (int N : {2, 3}) {
    auto cg = leray_schauder_degree(gp, N, 200, 3);
    CHECK(cg.degree == 1);
    CHECK(cg.L_N == N + 1);
    CHECK(cg.cross_check == "agree");
    CHECK(cg.sup_error_kernel <= cg.tau_estimate / 3);
    CHECK(existence_from_degree(cg, gp).residual_inf <= 1e-10);
  }
}

TEST_CASE("zero nonlinearity gives degree one") {
  auto p = make_problem([](const Point3& X, const Point3& Y) { return std::sin(3 * X.x() * Y.x()); },
                        [](const Point3&, double) { return 0.0; }, 0.1, 1.0, 0.0);
  for (int N : {0, 1, 2, 3}) CHECK(leray_schauder_degree(p, N, 100, 5).degree == 1);
}

TEST_CASE("expanding linear case has degree minus one") {
  auto p = constant_linear(2.0, 0.0, 1.0);
  auto c = leray_schauder_degree(p, 0, 200, 3);
  CHECK(c.degree == -1);
  auto sol = existence_from_degree(c, p);
  CHECK(sol.values.cwiseAbs().maxCoeff() <= 1e-12);

  DegreeCertificate zero = c;
  zero.degree = 0;
  CHECK_THROWS_AS(existence_from_degree(zero, p), PreconditionViolated);
}

TEST_CASE("budget discipline") {
  auto narrow = make_problem([](const Point3& X, const Point3& Y) { return 0.9 * std::exp(-(X - Y).squaredNorm() / 0.01); },
                             [](const Point3&, double s) { return s; }, 0.0, 1.0, 1.0);
  CHECK_THROWS_AS(leray_schauder_degree(narrow, 0, 100, 1), BudgetExceeded);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> W(0.05, 2.0), L(0.1, 0.8);
  for (int t = 0; t < 12; ++t) {
    double w = W(rng), lam = L(rng);
    auto p = make_problem([=](const Point3& X, const Point3& Y) { return lam * std::exp(-(X - Y).squaredNorm() / (w * w)); },
                          [](const Point3&, double s) { return std::sin(s); }, 0.1, 1.0, 1.0);
    for (int N : {0, 1, 3}) {
      try {
        auto c = leray_schauder_degree(p, N, 50, 2);
        CHECK(c.sup_error_kernel <= c.tau_estimate / 3);
        CHECK(c.sup_error_offset <= c.tau_estimate / 3);
      } catch (const BudgetExceeded&) {
      }
    }
  }
}

TEST_CASE("homotopy invariance") {
  auto base = make_problem([](const Point3& X, const Point3& Y) { return 0.5 * std::exp(-(X - Y).squaredNorm()); },
                           [](const Point3&, double s) { return std::tanh(s); }, 0.2, 1.0, 1.0);
  const double tau = estimate_tau(base, 200, 3);
  const int d0 = leray_schauder_degree(base, 2, 200, 3).degree;
  CHECK(d0 == 1);
  for (double eta : {0.05, 0.1, 0.2, 0.3, 0.4}) {
    auto p = base;
    p.psi = [eta](const Point3&, double s) { return std::tanh(s) + eta * s * s * s; };
    // sup|k| m(domain) sup|eta psi2| on the sphere |f| = M
    double shift = 0.5 * 1.0 * eta * std::pow(p.M, 3);
    CHECK(shift < tau);
    CHECK(leray_schauder_degree(p, 2, 200, 3).degree == d0);
  }
}

TEST_CASE("certificate export") {
  auto p = constant_linear(0.5, 0.2, 1.0);
  auto j = to_json(leray_schauder_degree(p, 1, 50, 4));
  for (const char* key : {"degree", "tau_estimate", "N", "L_N", "sup_error_kernel", "sup_error_offset", "method", "seed",
                          "multi_indices", "training_points_per_axis", "validation_points_per_axis", "boundary_samples"})
    CHECK(j.contains(key));
  CHECK(j["seed"] == 4);
  CHECK(j["method"] == "JacobianSignSum");
}
