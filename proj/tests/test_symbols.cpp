#include <doctest.h>

#include <complex>
#include <random>

#include "gie/errors.hpp"
#include "gie/symbols.hpp"

using namespace gie;

namespace {

ResolutionSpec single(Deriv d) { return ResolutionSpec{1, {{0, d}}}; }

ParameterSet laplacian_params() {
  auto p = ParameterSet::zeros(1);
  p.C[6](0, 0) = -1;  // u_yy
  p.C[8](0, 0) = -1;  // u_zz
  return p;
}

std::vector<Eigen::Vector3d> random_xi(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-2, 2);
  std::vector<Eigen::Vector3d> out;
  for (int i = 0; i < n; ++i) out.emplace_back(U(rng), U(rng), U(rng));
  return out;
}

double det_mismatch(const SymbolMatrices& sm, const SymbolicInverse& si, int samples) {
  double worst = 0.0;
  for (const auto& xi : random_xi(samples, 9)) {
    std::complex<double> direct = sm.B1.at_frequency(xi).determinant();
    std::complex<double> reduced = si.det.at_frequency(xi);
    worst = std::max(worst, std::abs(direct - reduced) / std::max(1e-300, std::abs(direct)));
  }
  return worst;
}

}  // namespace

TEST_CASE("polynomial arithmetic is exact") {
  Polynomial s1 = Polynomial::variable(0), s2 = Polynomial::variable(1);
  Polynomial p = (s1 + s2) * (s1 - s2);
  CHECK(p == s1 * s1 - s2 * s2);
  CHECK(p.degree() == 2);
  CHECK((p - p).is_zero());
  CHECK((s1 * Polynomial(Rational(1, 3))).coefficient({1, 0, 0}) == Rational(1, 3));
  CHECK(to_rational(0.1) != Rational(1, 10));
  CHECK(to_rational(0.5) == Rational(1, 2));
  auto v = p.at_frequency(Eigen::Vector3d(1, 2, 0));  // (i)^2 - (2i)^2 = 3
  CHECK(std::abs(v - std::complex<double>(3, 0)) < 1e-14);
}

TEST_CASE("slot names and spec validation") {
  CHECK(parse_slot("u_xx", 1) == Slot{0, Deriv::XX});
  CHECK(parse_slot("u2_x", 2) == Slot{1, Deriv::X});
  CHECK(slot_name(Slot{0, Deriv::YZ}, 1) == "u_yz");
  CHECK_THROWS_AS(parse_slot("u_q", 1), InvalidSpec);
  ResolutionSpec dup{2, {{0, Deriv::X}, {0, Deriv::X}}};
  CHECK_THROWS_AS(dup.validate(), InvalidSpec);
  ResolutionSpec missing{2, {{0, Deriv::X}}};
  CHECK_THROWS_AS(missing.validate(), InvalidSpec);
  auto s = spec_from_json({{"m", 1}, {"resolved", {"u_xx"}}});
  CHECK(s.resolved[0] == Slot{0, Deriv::XX});
  CHECK(s.unresolved().size() == 9);
  CHECK(s.z1_position(Slot{0, Deriv::XX}) == -1);
  CHECK(s.z1_position(Slot{0, Deriv::U}) == 0);
}

TEST_CASE("u resolved, u + u_x") {
  auto spec = single(Deriv::U);
  auto p = ParameterSet::zeros(1);
  p.C[0](0, 0) = -1;
  auto sm = build_symbol_matrices(spec, p);
  // A0 alpha0 = -s1
  PolyMatrix ba = PolyMatrix::from_rational(sm.A0) * sm.alpha0;
  CHECK(ba(0, 0) == -Polynomial::variable(0));
  CHECK(sm.B1 == sm.alpha0 * PolyMatrix::from_rational(sm.A0) - PolyMatrix::from_rational(sm.A));
  auto si = symbolic_det_and_inverse_factor(sm);
  CHECK(si.det == -(Polynomial(Rational(1)) + Polynomial::variable(0)));
  CHECK(std::abs(si.det.at_frequency(Eigen::Vector3d::Zero()) + 1.0) < 1e-15);
  auto rep = check_conditions(si.a1, si.a1_B1_inv, si.a1_B1_inv * sm.B2);
  CHECK(rep.local_integrability);
  CHECK(rep.weighted_decay);
}

TEST_CASE("u_x resolved") {
  auto p = ParameterSet::zeros(1);
  p.C[0](0, 0) = -1;
  auto si = symbolic_det_and_inverse_factor(build_symbol_matrices(single(Deriv::X), p));
  CHECK(si.det == Polynomial::variable(0) + Polynomial(Rational(1)));
}

TEST_CASE("Laplacian") {
  auto sm = build_symbol_matrices(single(Deriv::XX), laplacian_params());
  auto si = symbolic_det_and_inverse_factor(sm);
  Polynomial lap;
  for (int k = 0; k < 3; ++k) lap += Polynomial::variable(k) * Polynomial::variable(k);
  CHECK(si.det == lap);
  CHECK(std::abs(si.det.at_frequency(Eigen::Vector3d(1, 2, 2)) + 9.0) < 1e-12);
  for (const auto& xi : random_xi(50, 4)) {
    auto v = si.det.at_frequency(xi);
    CHECK(std::abs(v + xi.squaredNorm()) <= 1e-8 * xi.squaredNorm());
  }
  for (const auto& xi : random_xi(20, 5)) {
    Eigen::MatrixXcd lhs = si.a1_B1_inv.at_frequency(xi) * sm.B1.at_frequency(xi);
    Eigen::MatrixXcd rhs = si.a1.at_frequency(xi) * Eigen::MatrixXcd::Identity(9, 9);
    CHECK((lhs - rhs).norm() <= 1e-9 * rhs.norm());
  }
  auto rep = check_conditions(si.a1, si.a1_B1_inv, si.a1_B1_inv * sm.B2);
  CHECK(rep.local_integrability);
  CHECK(rep.weighted_decay);
  CHECK(rep.budget.a == si.a1_B1_inv.degree());
  CHECK(rep.budget.m1 == 6 + 2 * rep.budget.a);
  CHECK(rep.budget.m1 == 10);
}

TEST_CASE("degree bounds") {
  auto sm = build_symbol_matrices(single(Deriv::XX), laplacian_params());
  CHECK(sm.B1.degree() <= 2);
  CHECK(sm.B2.degree() <= 2);
  auto si = symbolic_det_and_inverse_factor(sm);
  CHECK(si.a1_B1_inv.degree() <= si.a1.degree() + 2 * (9 - 1));
}

TEST_CASE("reduced determinant matches the direct one") {
  {
    auto sm = build_symbol_matrices(single(Deriv::XX), laplacian_params());
    CHECK(det_mismatch(sm, symbolic_det_and_inverse_factor(sm), 50) <= 1e-8);
  }
  {
    ResolutionSpec s{2, {{0, Deriv::XX}, {1, Deriv::XX}}};
    auto p = ParameterSet::zeros(2);
    p.C[6] = -Eigen::MatrixXd::Identity(2, 2);
    p.C[8] = -Eigen::MatrixXd::Identity(2, 2);
    p.C[0] << 0.5, 0.25, 0, 0.3;
    auto sm = build_symbol_matrices(s, p);
    CHECK(det_mismatch(sm, symbolic_det_and_inverse_factor(sm), 50) <= 1e-8);
  }
  {
    ResolutionSpec s{2, {{0, Deriv::U}, {1, Deriv::X}}};
    auto p = ParameterSet::zeros(2);
    p.C[0] << -1, 0.5, 0, 0;
    p.C[1] << 0, 0, 0.5, -1;
    p.C[3](1, 0) = 0.25;
    auto sm = build_symbol_matrices(s, p);
    auto si = symbolic_det_and_inverse_factor(sm);
    CHECK(si.route == "schur");
    CHECK(det_mismatch(sm, si, 50) <= 1e-8);
  }
}

TEST_CASE("parameter derivation") {
  auto spec = single(Deriv::U);
  std::vector<Eigen::MatrixXd> cp(9, Eigen::MatrixXd::Zero(1, 1));
  cp[0](0, 0) = -1;  // C''_2 = -C'_1 = 1
  auto p = derive_parameters(spec, cp);
  CHECK(p.C[0](0, 0) == -1.0);
  for (int k = 1; k < 9; ++k) CHECK(p.C[static_cast<std::size_t>(k)](0, 0) == 0.0);
  auto sm = build_symbol_matrices(spec, p);
  for (const auto& xi : random_xi(50, 8)) CHECK(std::abs(sm.B1.at_frequency(xi).determinant()) > 0.0);

  std::vector<Eigen::MatrixXd> bad(9, Eigen::MatrixXd::Zero(1, 1));
  CHECK_THROWS_AS(derive_parameters(single(Deriv::XX), bad), NotInvertible);
}

TEST_CASE("permutation coherence") {
  CHECK(permutation_coherent(single(Deriv::XX), laplacian_params()));
  ResolutionSpec s{2, {{1, Deriv::YZ}, {0, Deriv::U}}};
  auto p = ParameterSet::zeros(2);
  p.C[2] << 1, 2, 3, 4;
  CHECK(permutation_coherent(s, p));
}

TEST_CASE("adversarial determinant fails the integrability proxy") {
  auto sm = build_symbol_matrices(single(Deriv::X), ParameterSet::zeros(1));
  auto si = symbolic_det_and_inverse_factor(sm);
  CHECK(si.a1 == Polynomial::variable(0));
  CHECK_THROWS_AS(check_conditions(si.a1, si.a1_B1_inv, si.a1_B1_inv * sm.B2), ConditionFailed);
  auto rep = check_conditions(si.a1, si.a1_B1_inv, si.a1_B1_inv * sm.B2, {}, false);
  CHECK_FALSE(rep.local_integrability);
  CHECK(rep.sublevel_exponent < 1.25);
}
