#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "gie/errors.hpp"
#include "gie/funcspace.hpp"

using namespace gie;

namespace {

const Point3 kLo(-1, -1, -1), kHi(1, 1, 1);

GridFunction random_field(std::mt19937_64& rng, std::array<int, 3> shape) {
  std::uniform_real_distribution<double> U(-1, 1);
  auto f = make_grid_function(kLo, kHi, shape);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = U(rng);
  return f;
}

}  // namespace

TEST_CASE("mollifier transform") {
  CHECK(mollifier_fourier(0.3, Point3::Zero()) == 1.0);
  CHECK(mollifier_fourier(1.0, Point3(2, 0, 0)) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(mollifier_fourier(4.0, Point3(0, 1, 0)) == doctest::Approx(mollifier_fourier(1.0, Point3(2, 0, 0))));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-3, 3), E(0.05, 2.0);
  for (int t = 0; t < 20; ++t) {
    double eps = E(rng);
    Point3 xi(U(rng), U(rng), U(rng));
    CHECK(std::abs(mollifier_fourier_numeric(eps, xi) - mollifier_fourier(eps, xi)) <= 1e-6);
  }
  CHECK_THROWS_AS(mollifier_fourier(0.0, Point3::Zero()), PreconditionViolated);
}

TEST_CASE("mollify reproduces constants away from the faces") {
  auto f = sample(kLo, kHi, {24, 24, 24}, [](const Point3&) { return 2.5; });
  const double eps = 0.004;
  auto g = mollify(f, eps);
  const double margin = 6 * std::sqrt(eps);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j)
      for (int k = 0; k < 24; ++k) {
        Point3 c = g.center(i, j, k);
        if ((c - kLo).minCoeff() >= margin && (kHi - c).minCoeff() >= margin)
          CHECK(std::abs(g.values[static_cast<Eigen::Index>(g.index(i, j, k))] - 2.5) <= 1e-12);
      }
}

TEST_CASE("point mass spreads with variance eps/2") {
  auto f = make_grid_function(kLo, kHi, {32, 32, 32});
  f.values[static_cast<Eigen::Index>(f.index(16, 16, 16))] = 1.0;
  const double eps = 0.02;
  auto g = mollify(f, eps);
  double mass = 0, m2[3] = {0, 0, 0};
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      for (int k = 0; k < 32; ++k) {
        double v = g.values[static_cast<Eigen::Index>(g.index(i, j, k))];
        Point3 d = g.center(i, j, k) - f.center(16, 16, 16);
        mass += v;
        for (int a = 0; a < 3; ++a) m2[a] += v * d[a] * d[a];
      }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  for (double m : m2) CHECK(std::abs(m / mass / (eps / 2) - 1) <= 0.05);
}

TEST_CASE("mollification error is first order in eps") {
  auto f = sample(kLo, kHi, {64, 64, 64}, [](const Point3& X) { return std::sin(X.x()); });
  std::vector<double> err;
  const std::vector<double> eps = {0.004, 0.002, 0.001};
  for (double e : eps) {
    auto g = mollify(f, e);
    double worst = 0.0;
    for (int i = 16; i < 48; ++i)
      for (int j = 16; j < 48; ++j)
        for (int k = 16; k < 48; ++k) {
          auto id = static_cast<Eigen::Index>(f.index(i, j, k));
          worst = std::max(worst, std::abs(g.values[id] - f.values[id]));
        }
    err.push_back(worst);
  }
  double order = std::log(err[0] / err[2]) / std::log(eps[0] / eps[2]);
  CHECK(order >= 0.9);
}

TEST_CASE("negative norm") {
  auto zero = make_grid_function(kLo, kHi, {8, 8, 8});
  CHECK(negative_norm(zero, 3) == 0.0);

  auto s = sample(kLo, kHi, {16, 16, 16}, [](const Point3& X) { return std::sin(3 * X.x()) * std::cos(2 * X.y()) + X.z(); });
  CHECK(std::abs(negative_norm(s, 0) / l2_norm(s) - 1) <= 1e-8);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    auto f = random_field(rng, {8, 8, 8});
    CHECK(negative_norm(f, 10) <= negative_norm_bound(f) * sup_norm(f));
  }
  for (int t = 0; t < 10; ++t) {
    auto f = random_field(rng, {8, 8, 8});
    auto g = random_field(rng, {8, 8, 8});
    for (int m = 0; m < 4; ++m) CHECK(negative_norm(f, m + 1) <= negative_norm(f, m) * (1 + 1e-12));
    auto sum = f;
    sum.values += g.values;
    CHECK(negative_norm(sum, 2) <= (negative_norm(f, 2) + negative_norm(g, 2)) * (1 + 1e-12));
    auto scaled = f;
    scaled.values *= -3.0;
    CHECK(negative_norm(scaled, 2) == doctest::Approx(3.0 * negative_norm(f, 2)).epsilon(1e-12));
  }
}

TEST_CASE("mollified residual decays along the schedule") {
  auto f = sample(kLo, kHi, {32, 32, 32}, [](const Point3& X) { return std::exp(-4 * X.squaredNorm()); });
  const double h = f.spacing.x();
  std::vector<double> r;
  for (double factor : {0.2, 0.1, 0.05, 0.025}) {
    auto d = mollify(f, factor * h * h);
    d.values -= f.values;
    r.push_back(negative_norm(d, 10));
  }
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] <= r[i - 1]);
  CHECK(r.back() <= 0.1 * r.front());
}

TEST_CASE("volume grid transfer and storage") {
  auto m = make_unit_sphere(2);
  auto g = make_volume_grid(m, 8);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(g.size()), 0, 1);
  auto f = from_volume_grid(g, v);
  CHECK((to_volume_grid(f, g) - v).norm() == 0.0);
  CHECK_THROWS_AS(from_volume_grid(g, Eigen::VectorXd::Zero(3)), LengthMismatch);

  const std::string path = "funcspace_roundtrip.bin";
  save_binary(f, path);
  auto back = load_binary(path);
  CHECK(back.shape == f.shape);
  CHECK((back.values - f.values).norm() == 0.0);
  std::remove(path.c_str());
  CHECK(to_json(f)["shape"][0] == 8);
  CHECK_THROWS_AS(make_grid_function(kLo, kHi, {3, 8, 8}), PreconditionViolated);
}
