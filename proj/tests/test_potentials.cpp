#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gie/errors.hpp"
#include "gie/potentials.hpp"

using namespace gie;
constexpr double kPi = std::numbers::pi;

namespace {

const SurfaceMesh& sphere3() {
  static const SurfaceMesh m = make_unit_sphere(3);
  return m;
}

BoundaryField ones(const SurfaceMesh& m) { return BoundaryField::Ones(static_cast<Eigen::Index>(m.size())); }

}  // namespace

TEST_CASE("Gauss integral trichotomy") {
  const auto& m = sphere3();
  CHECK(std::abs(solid_angle(m, Point3::Zero()) / (-4 * kPi) - 1) < 0.01);
  CHECK(std::abs(solid_angle(m, Point3(5, 0, 0))) < 0.05);
  CHECK(std::abs(solid_angle(m, m.nodes[40], true) / (-2 * kPi) - 1) < 0.03);
  CHECK_THROWS_AS(solid_angle(m, m.nodes[40]), SingularEvaluation);
}

TEST_CASE("absolute solid angle") {
  const auto& m = sphere3();
  CHECK(std::abs(absolute_solid_angle(m, Point3::Zero()) / (4 * kPi) - 1) < 0.01);
  CHECK(absolute_solid_angle(m, Point3(5, 0, 0)) <= 4 * kPi / 24 * 1.05);
  for (double t : {-1.5, -0.99, 0.0, 0.7, 1.01, 3.0}) CHECK(std::isfinite(absolute_solid_angle(m, Point3(t, 0.1, 0.2))));
}

TEST_CASE("single layer") {
  const auto& m = sphere3();
  auto v = ones(m);
  CHECK(std::abs(single_layer(m, v, Point3::Zero(), KernelConvention::Unnormalized) / (4 * kPi) - 1) < 0.01);
  CHECK(std::abs(single_layer(m, v, Point3(0, 0, 2), KernelConvention::Unnormalized) / (2 * kPi) - 1) < 0.01);
  CHECK(single_layer(m, 0 * v, Point3(0.1, 0, 0), KernelConvention::Newton) == 0.0);
}

TEST_CASE("double layer") {
  const auto& m = sphere3();
  auto v = ones(m);
  CHECK(std::abs(double_layer(m, v, Point3(0.2, -0.1, 0.3), KernelConvention::Unnormalized) / (-4 * kPi) - 1) < 0.01);
  CHECK(std::abs(double_layer(m, v, Point3(2, 1, 0), KernelConvention::Newton)) < 0.01);
}

TEST_CASE("convention factors") {
  const auto& m = sphere3();
  BoundaryField v(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) v[static_cast<Eigen::Index>(i)] = 1 + m.nodes[i].x() * m.nodes[i].y();
  for (const Point3& X : {Point3(0.1, 0.2, 0.3), Point3(1.5, 0, 0.4)}) {
    double sn = single_layer(m, v, X, KernelConvention::Newton), su = single_layer(m, v, X, KernelConvention::Unnormalized);
    double dn = double_layer(m, v, X, KernelConvention::Newton), du = double_layer(m, v, X, KernelConvention::Unnormalized);
    CHECK(std::abs(sn * 4 * kPi - su) <= 1e-12 * std::abs(su));
    CHECK(std::abs(dn * -4 * kPi - du) <= 1e-12 * std::abs(du) + 1e-14);
  }
}

TEST_CASE("solid angle converges under refinement") {
  const Point3 X(0.3, -0.2, 0.4);
  std::vector<double> e, h;
  for (int L = 3; L <= 5; ++L) {
    auto m = make_unit_sphere(L);
    e.push_back(std::abs(solid_angle(m, X) + 4 * kPi));
    h.push_back(m.mean_spacing());
  }
  // coarser levels are still pre-asymptotic (the error changes sign near level 2)
  CHECK(e[2] < e[1]);
  CHECK(e[1] < e[0]);
  CHECK(std::log(e[0] / e[2]) / std::log(h[0] / h[2]) >= 1.0);
}

TEST_CASE("interior limit is principal value plus half density") {
  const auto& m = sphere3();
  BoundaryField v(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) v[static_cast<Eigen::Index>(i)] = 1 + 0.5 * m.nodes[i].z();
  for (int node : {3, 77, 150, 301, 600}) {
    const Point3& P = m.nodes[static_cast<std::size_t>(node)];
    double pv = double_layer(m, v, P, KernelConvention::Newton, true);
    double inner = double_layer(m, v, P - 0.25 * m.spacing[static_cast<std::size_t>(node)] * m.normals[static_cast<std::size_t>(node)],
                                KernelConvention::Newton);
    double outer = double_layer(m, v, P + 0.25 * m.spacing[static_cast<std::size_t>(node)] * m.normals[static_cast<std::size_t>(node)],
                                KernelConvention::Newton);
    double vn = v[node];
    CHECK(std::abs(inner - (pv + 0.5 * vn)) <= 0.05 * std::abs(vn));
    CHECK(std::abs(outer - (pv - 0.5 * vn)) <= 0.05 * std::abs(vn));
    CHECK(std::abs((inner - outer) - vn) <= 0.05 * std::abs(vn));
  }
}

TEST_CASE("layer potentials are harmonic off the surface") {
  const auto& m = sphere3();
  BoundaryField v(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) v[static_cast<Eigen::Index>(i)] = 1 + m.nodes[i].x() - m.nodes[i].z() * m.nodes[i].y();
  const double h = 1e-2;
  for (const Point3& X : {Point3(0.1, 0.2, -0.1), Point3(1.8, 0.3, 0.2)}) {
    for (int kind = 0; kind < 2; ++kind) {
      auto f = [&](const Point3& Y) {
        return kind ? double_layer(m, v, Y, KernelConvention::Newton) : single_layer(m, v, Y, KernelConvention::Newton);
      };
      double c = f(X), lap = -6 * c;
      for (int a = 0; a < 3; ++a)
        for (double s : {-h, h}) {
          Point3 Y = X;
          Y[a] += s;
          lap += f(Y);
        }
      lap /= h * h;
      CHECK(std::abs(lap) * h * h <= 1e-2 * std::abs(c));
    }
  }
}

TEST_CASE("Newton potential on the ball") {
  const auto& m = sphere3();
  auto g = make_volume_grid(m, 16);
  Eigen::VectorXd f = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.size()));
  CHECK(std::abs(newton_potential(g, f, Point3::Zero()) / 0.5 - 1) < 0.02);
  CHECK(newton_potential(g, 0 * f, Point3::Zero()) == 0.0);
  Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(f.size(), -1, 2);
  const Point3 X(0.2, 0.1, -0.3);
  CHECK(newton_potential(g, 2.5 * r, X) == doctest::Approx(2.5 * newton_potential(g, r, X)).epsilon(1e-12));
  // -grad of (3 - r^2)/6 at r = 1 along z
  CHECK(std::abs(newton_gradient(g, f, Point3(0, 0, 0.999)).z() + 1.0 / 3.0) < 0.02);
}
