#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gie/errors.hpp"
#include "gie/geometry.hpp"

using namespace gie;
constexpr double kPi = std::numbers::pi;

TEST_CASE("icosphere sizes and normals") {
  auto m0 = make_unit_sphere(0);
  CHECK(m0.size() == 12);
  CHECK(m0.triangles.size() == 20);
  for (int L = 0; L <= 3; ++L) {
    auto m = make_unit_sphere(L);
    CHECK(is_watertight(m));
    for (const auto& n : m.normals) CHECK(std::abs(n.norm() - 1.0) <= 1e-12);
    Point3 s = Point3::Zero();
    for (std::size_t i = 0; i < m.size(); ++i) s += m.weights[i] * m.normals[i];
    CHECK(s.norm() < 1e-10);
  }
}

TEST_CASE("area converges with order two") {
  std::vector<double> err, h;
  for (int L = 1; L <= 4; ++L) {
    auto m = make_unit_sphere(L);
    err.push_back(std::abs(m.total_area() - 4 * kPi));
    h.push_back(m.mean_spacing());
  }
  CHECK(std::abs(make_unit_sphere(3).total_area() / (4 * kPi) - 1) < 5e-3);
  double order = std::log(err[2] / err[3]) / std::log(h[2] / h[3]);
  CHECK(order >= 1.9);
}

TEST_CASE("surface integrals") {
  auto m = make_unit_sphere(3);
  const auto n = static_cast<Eigen::Index>(m.size());
  CHECK(std::abs(surface_integral(m, BoundaryField::Ones(n)) / (4 * kPi) - 1) < 5e-3);
  CHECK(surface_integral(m, BoundaryField::Zero(n)) == 0.0);
  BoundaryField n1(n);
  for (Eigen::Index i = 0; i < n; ++i) n1[i] = m.normals[static_cast<std::size_t>(i)].x();
  CHECK(std::abs(surface_integral(m, n1)) < 1e-10);
  CHECK_THROWS_AS(surface_integral(m, BoundaryField::Ones(n - 1)), LengthMismatch);
}

TEST_CASE("classification") {
  auto m = make_unit_sphere(3);
  CHECK(classify_point(m, Point3::Zero()) == Location::Interior);
  CHECK(classify_point(m, Point3(5, 0, 0)) == Location::Exterior);
  CHECK(classify_point(m, m.nodes[17]) == Location::Boundary);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2, 2);
  const double band = 2 * m.mean_spacing();
  int checked = 0;
  while (checked < 200) {
    Point3 X(U(rng), U(rng), U(rng));
    if (std::abs(X.norm() - 1) <= band) continue;
    CHECK(classify_point(m, X) == (X.norm() < 1 ? Location::Interior : Location::Exterior));
    ++checked;
  }
}

TEST_CASE("mesh round trip and validation") {
  auto m = make_unit_sphere(1);
  auto back = mesh_from_json(mesh_to_json(m));
  CHECK(back.size() == m.size());
  CHECK((back.nodes[5] - m.nodes[5]).norm() == 0.0);
  auto open = m;
  open.triangles.pop_back();
  CHECK_FALSE(is_watertight(open));
  CHECK_THROWS_AS(make_mesh(open.nodes, open.triangles), InvalidMesh);
}

TEST_CASE("volume grid of the ball") {
  auto m = make_unit_sphere(3);
  auto g = make_volume_grid(m, 12);
  CHECK(std::abs(g.volume() - 4 * kPi / 3) / (4 * kPi / 3) < 0.02);
  for (const auto& c : g.centers) CHECK(c.norm() < 1.0);
}
