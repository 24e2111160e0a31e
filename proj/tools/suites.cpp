#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "gie/bie.hpp"
#include "gie/degree.hpp"
#include "gie/funcspace.hpp"
#include "gie/solver.hpp"
#include "gie/symbols.hpp"

namespace gie {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
using Field = std::function<double(const Point3&)>;

json point(const Point3& X) { return json::array({X.x(), X.y(), X.z()}); }

BoundaryField trace(const SurfaceMesh& m, const Field& f) {
  BoundaryField v(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(m.nodes[i]);
  return v;
}

double rel_l2(const BoundaryField& a, const BoundaryField& b) { return (a - b).norm() / b.norm(); }

Point3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Point3 d(N(rng), N(rng), N(rng));
  return d.normalized();
}

std::vector<std::size_t> pick_nodes(std::size_t n, int count, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min<std::size_t>(n, static_cast<std::size_t>(count)));
  return idx;
}

// interior probes, uniform in the ball of radius rmax
std::vector<Point3> ball_points(int n, double rmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Point3> out;
  for (int i = 0; i < n; ++i) out.push_back(rmax * std::cbrt(U(rng)) * random_direction(rng));
  return out;
}

const std::vector<std::pair<std::string, Field>>& harmonic_polynomials() {
  static const std::vector<std::pair<std::string, Field>> hs = {
      {"1", [](const Point3&) { return 1.0; }},
      {"x", [](const Point3& P) { return P.x(); }},
      {"y", [](const Point3& P) { return P.y(); }},
      {"z", [](const Point3& P) { return P.z(); }},
      {"xy", [](const Point3& P) { return P.x() * P.y(); }},
      {"yz", [](const Point3& P) { return P.y() * P.z(); }},
      {"xz", [](const Point3& P) { return P.x() * P.z(); }},
      {"x2-y2", [](const Point3& P) { return P.x() * P.x() - P.y() * P.y(); }},
      {"z2-(x2+y2)/2", [](const Point3& P) { return P.z() * P.z() - (P.x() * P.x() + P.y() * P.y()) / 2; }},
  };
  return hs;
}

// ---- solid angle

void solid_angle_suite(const json& p, unsigned seed, SuiteReport& r) {
  auto m = make_unit_sphere(p["level"].get<int>());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> Rext(1.2, 3.0);
  json in = json::array(), out = json::array(), bd = json::array();
  double ein = 0.0, eout = 0.0, ebd = 0.0;
  for (const auto& X : ball_points(p["interior"].get<int>(), 0.9, rng)) {
    double w = solid_angle(m, X);
    ein = std::max(ein, std::abs(w / (-4 * kPi) - 1));
    in.push_back({{"point", point(X)}, {"value", w}});
  }
  for (int i = 0; i < p["exterior"].get<int>(); ++i) {
    Point3 X = Rext(rng) * random_direction(rng);
    double w = solid_angle(m, X);
    eout = std::max(eout, std::abs(w));
    out.push_back({{"point", point(X)}, {"value", w}});
  }
  for (std::size_t k : pick_nodes(m.size(), p["boundary"].get<int>(), rng)) {
    double w = solid_angle(m, m.nodes[k], true);
    ebd = std::max(ebd, std::abs(w / (-2 * kPi) - 1));
    bd.push_back({{"node", k}, {"value", w}});
  }
  r.results = {{"nodes", m.size()}, {"interior", in}, {"exterior", out}, {"boundary", bd}};
  r.check("interior relative error vs -4pi", ein, p["tol_interior"].get<double>());
  r.check("exterior absolute value", eout, p["tol_exterior"].get<double>());
  r.check("boundary relative error vs -2pi", ebd, p["tol_boundary"].get<double>());
}

// ---- jump relation of the double layer

void jump_suite(const json& p, unsigned seed, SuiteReport& r) {
  auto m = make_unit_sphere(p["level"].get<int>());
  auto v = trace(m, [](const Point3& P) { return 1.0 + 0.5 * P.z(); });
  std::mt19937_64 rng(seed);
  const double off = p["offset"].get<double>();
  json rows = json::array();
  double worst = 0.0;
  for (std::size_t k : pick_nodes(m.size(), p["nodes"].get<int>(), rng)) {
    const Point3& P = m.nodes[k];
    const Point3 d = off * m.spacing[k] * m.normals[k];
    double inner = double_layer(m, v, P - d, KernelConvention::Newton);
    double outer = double_layer(m, v, P + d, KernelConvention::Newton);
    double pv = double_layer(m, v, P, KernelConvention::Newton, true);
    double vk = v[static_cast<Eigen::Index>(k)];
    double e = std::abs((inner - outer) - vk) / std::abs(vk);
    worst = std::max(worst, e);
    rows.push_back({{"node", k}, {"v", vk}, {"inner", inner}, {"outer", outer}, {"principal_value", pv}, {"rel_error", e}});
  }
  r.results = {{"nodes", m.size()}, {"probes", rows}};
  r.check("jump relative error", worst, p["tol"].get<double>());
}

// ---- Dirichlet to Neumann

void dtn_suite(const json& p, unsigned, SuiteReport& r) {
  auto m = make_unit_sphere(p["level"].get<int>());
  auto sys = assemble_neumann_system(m);
  const auto n = static_cast<Eigen::Index>(m.size());
  auto z = trace(m, [](const Point3& P) { return P.z(); });
  auto q = trace(m, [](const Point3& P) { return P.z() * P.z() - (P.x() * P.x() + P.y() * P.y()) / 2; });
  double ez = rel_l2(solve_neumann_data(sys, z), z);
  double eq = rel_l2(solve_neumann_data(sys, q), 2 * q);
  double h0 = solve_neumann_data(sys, BoundaryField::Zero(n)).cwiseAbs().maxCoeff();
  double h1 = Eigen::VectorXd(sys.lu.solve(Eigen::VectorXd::Zero(n))).cwiseAbs().maxCoeff();
  r.results = {{"nodes", m.size()},
               {"condition", sys.condition},
               {"linear_rel_l2", ez},
               {"quadratic_rel_l2", eq},
               {"homogeneous_max", std::max(h0, h1)}};
  r.check("A1 = z relative L2 error", ez, p["tol_linear"].get<double>());
  r.check("degree-2 harmonic relative L2 error", eq, p["tol_quadratic"].get<double>());
  r.check("homogeneous solution magnitude", std::max(h0, h1), p["tol_homogeneous"].get<double>());
}

// ---- representation formula: harmonic reproduction and the Poisson ball

void poisson_suite(const json& p, unsigned seed, SuiteReport& r) {
  auto m = make_unit_sphere(p["level"].get<int>());
  auto sys = assemble_neumann_system(m);
  std::mt19937_64 rng(seed);
  auto probes = ball_points(p["probes"].get<int>(), p["probe_radius"].get<double>(), rng);
  const double tol = p["tol"].get<double>();
  json hs = json::object();
  double worst = 0.0;
  for (const auto& [name, u] : harmonic_polynomials()) {
    auto a1 = trace(m, u);
    auto a5 = solve_neumann_data(sys, a1);
    double scale = 0.0, err = 0.0;
    for (const auto& X : probes) {
      scale = std::max(scale, std::abs(u(X)));
      err = std::max(err, std::abs(evaluate_representation(m, a1, a5, X) - u(X)));
    }
    hs[name] = err / scale;
    worst = std::max(worst, err / scale);
  }
  auto g = make_volume_grid(m, p["grid"].get<int>());
  Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.size()));
  BoundaryField zero = BoundaryField::Zero(static_cast<Eigen::Index>(m.size()));
  auto a5 = solve_neumann_data(sys, zero, &g, &one);
  double u0 = evaluate_representation(m, g, zero, a5, one, Point3::Zero());
  json probes_json = json::array();
  for (const auto& X : probes) probes_json.push_back(point(X));
  r.results = {{"probes", probes_json}, {"harmonic_rel_error", hs}, {"cells", g.size()}, {"poisson_u0", u0}};
  r.check("harmonic reproduction relative error", worst, tol);
  r.check("Poisson u(0) relative error vs 1/6", std::abs(6 * u0 - 1), tol);
}

// ---- symbol algebra

std::vector<Eigen::Vector3d> random_xi(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-2, 2);
  std::vector<Eigen::Vector3d> out;
  for (int i = 0; i < n; ++i) out.emplace_back(U(rng), U(rng), U(rng));
  return out;
}

double det_mismatch(const SymbolMatrices& sm, const SymbolicInverse& si, const std::vector<Eigen::Vector3d>& xis) {
  double worst = 0.0;
  for (const auto& xi : xis) {
    std::complex<double> direct = sm.B1.at_frequency(xi).determinant();
    worst = std::max(worst, std::abs(direct - si.det.at_frequency(xi)) / std::max(1e-300, std::abs(direct)));
  }
  return worst;
}

void symbols_suite(const json& p, unsigned seed, SuiteReport& r) {
  const std::string which = p["spec"].get<std::string>();
  if (which != "all" && which != "laplacian" && which != "u-resolved")
    throw ConfigInvalid("spec must be all, laplacian or u-resolved");
  std::mt19937_64 rng(seed);
  auto xis = random_xi(p["xi_samples"].get<int>(), rng);
  const double tol = p["tol"].get<double>();

  if (which != "u-resolved") {
    ResolutionSpec s{1, {{0, Deriv::XX}}};
    auto c = ParameterSet::zeros(1);
    c.C[6](0, 0) = -1;
    c.C[8](0, 0) = -1;
    auto sm = build_symbol_matrices(s, c);
    auto si = symbolic_det_and_inverse_factor(sm);
    double worst = 0.0;
    for (const auto& xi : xis) worst = std::max(worst, std::abs(si.det.at_frequency(xi) + xi.squaredNorm()) / xi.squaredNorm());
    auto rep = check_conditions(si.a1, si.a1_B1_inv, si.a1_B1_inv * sm.B2, {}, false);
    r.results["laplacian"] = {{"det", si.det.to_string()}, {"det_degree", si.det.degree()}, {"route", si.route},
                              {"conditions", to_json(rep)}, {"max_rel_error", worst}};
    r.check("laplacian det = -|xi|^2", worst, tol);
    r.check_bool("laplacian det degree 2", si.det.degree() == 2);
    r.check_bool("laplacian local integrability", rep.local_integrability);
    r.check_bool("laplacian weighted decay", rep.weighted_decay);
    r.check("laplacian reduced vs direct det", det_mismatch(sm, si, xis), tol);
  }
  if (which != "laplacian") {
    ResolutionSpec s{1, {{0, Deriv::U}}};
    auto c = ParameterSet::zeros(1);
    c.C[0](0, 0) = -1;
    auto sm = build_symbol_matrices(s, c);
    auto si = symbolic_det_and_inverse_factor(sm);
    double worst = 0.0;
    for (const auto& xi : xis) {
      std::complex<double> want = -(1.0 + std::complex<double>(0.0, xi.x()));
      worst = std::max(worst, std::abs(si.det.at_frequency(xi) - want) / std::abs(want));
    }
    auto rep = check_conditions(si.a1, si.a1_B1_inv, si.a1_B1_inv * sm.B2, {}, false);
    r.results["u_resolved"] = {{"det", si.det.to_string()}, {"det_degree", si.det.degree()}, {"route", si.route},
                               {"conditions", to_json(rep)}, {"max_rel_error", worst}};
    r.check("u-resolved det = -(1 + i xi1)", worst, tol);
    r.check_bool("u-resolved local integrability", rep.local_integrability);
    r.check_bool("u-resolved weighted decay", rep.weighted_decay);
    r.check("u-resolved reduced vs direct det", det_mismatch(sm, si, xis), tol);
  }
  if (which == "all") {
    ResolutionSpec a{2, {{0, Deriv::XX}, {1, Deriv::XX}}};
    auto ca = ParameterSet::zeros(2);
    ca.C[6] = -Eigen::MatrixXd::Identity(2, 2);
    ca.C[8] = -Eigen::MatrixXd::Identity(2, 2);
    ca.C[0] << 0.5, 0.25, 0, 0.3;
    ResolutionSpec b{2, {{0, Deriv::U}, {1, Deriv::X}}};
    auto cb = ParameterSet::zeros(2);
    cb.C[0] << -1, 0.5, 0, 0;
    cb.C[1] << 0, 0, 0.5, -1;
    cb.C[3](1, 0) = 0.25;
    json rows = json::array();
    for (const auto& [s, c] : {std::pair{a, ca}, std::pair{b, cb}}) {
      auto sm = build_symbol_matrices(s, c);
      auto si = symbolic_det_and_inverse_factor(sm);
      double e = det_mismatch(sm, si, xis);
      rows.push_back({{"route", si.route}, {"det_degree", si.det.degree()}, {"max_rel_error", e}});
      r.check("m = 2 reduced vs direct det (" + si.route + ")", e, tol);
    }
    r.results["m2"] = rows;
  }
}

// ---- mollifier and negative norm

void mollifier_suite(const json& p, unsigned seed, SuiteReport& r) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-3, 3), E(0.05, 2.0), V(-1, 1);
  double ft = 0.0;
  for (int t = 0; t < p["pairs"].get<int>(); ++t) {
    double eps = E(rng);
    Point3 xi(U(rng), U(rng), U(rng));
    ft = std::max(ft, std::abs(mollifier_fourier_numeric(eps, xi) - mollifier_fourier(eps, xi)));
  }
  const Point3 lo(-1, -1, -1), hi(1, 1, 1);
  const int m1 = p["m1"].get<int>();
  double ratio = 0.0;
  for (int t = 0; t < p["fields"].get<int>(); ++t) {
    auto f = make_grid_function(lo, hi, {8, 8, 8});
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = V(rng);
    ratio = std::max(ratio, negative_norm(f, m1) / (negative_norm_bound(f) * sup_norm(f)));
  }
  auto f = sample(lo, hi, {32, 32, 32}, [](const Point3& X) { return std::exp(-4 * X.squaredNorm()); });
  const double h = f.spacing.x();
  json decay = json::array();
  std::vector<double> res;
  for (double factor : {0.2, 0.1, 0.05, 0.025}) {
    auto d = mollify(f, factor * h * h);
    d.values -= f.values;
    res.push_back(negative_norm(d, m1));
    decay.push_back({{"epsilon", factor * h * h}, {"residual_negnorm", res.back()}});
  }
  r.results = {{"fourier_max_error", ft}, {"bound_ratio_max", ratio}, {"decay", decay}};
  r.check("mollifier transform error", ft, p["tol_fourier"].get<double>());
  r.check("negative norm / (C sup norm)", ratio, 1.0);
  r.check("mollified residual final / initial", res.back() / res.front(), p["decay"].get<double>());
}

// ---- Hammerstein closed forms

HammersteinProblem manufactured_hammerstein(int n) {
  HammersteinProblem p;
  p.domain = interval_domain(0, 1, n);
  p.k = [](const Point3& X, const Point3& Y) { return 0.5 * std::exp(-(X - Y).squaredNorm()); };
  p.psi = [](const Point3&, double s) { return std::sin(s); };
  // g makes f = cos x exact; the integral by fine Simpson quadrature
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

void hammerstein_solve_suite(const json& p, unsigned, SuiteReport& r) {
  const double tol = p["tol"].get<double>();
  if (!p["problem"].is_null()) {
    HammersteinProblem hp;
    try {
      hp = problem_from_json(p["problem"]);
    } catch (const InvalidSpec& e) {
      throw ConfigInvalid(e.what());
    }
    PicardOptions o;
    o.best_effort = true;
    auto sol = picard_solve(hp, tol, p["max_iter"].get<int>(), o);
    json nodes = json::array();
    for (const auto& X : sol.nodes) nodes.push_back(X.x());
    r.results = {{"nodes", nodes},
                 {"values", std::vector<double>(sol.values.data(), sol.values.data() + sol.values.size())},
                 {"iterations", sol.iterations},
                 {"contraction_bound", sol.contraction_bound},
                 {"certified", sol.certified},
                 {"residual_inf", sol.residual_inf}};
    r.check("residual", sol.residual_inf, tol);
    return;
  }

  const double lam = p["lambda"].get<double>(), c = p["c"].get<double>();
  HammersteinProblem hp;
  hp.domain = interval_domain(0, 1, p["n"].get<int>());
  hp.k = [lam](const Point3&, const Point3&) { return lam; };
  hp.psi = [](const Point3&, double s) { return s; };
  hp.g = [c](const Point3&) { return c; };
  hp.M = p["M"].get<double>();
  hp.lipschitz = 1.0;
  auto sol = picard_solve(hp, tol, p["max_iter"].get<int>());
  const double exact = c / (1 - lam);
  double ce = (sol.values.array() - exact).abs().maxCoeff();

  json rows = json::array();
  std::vector<double> hs, es;
  for (int n : p["levels"].get<std::vector<int>>()) {
    auto mp = manufactured_hammerstein(n);
    auto ms = picard_solve(mp, 1e-13, p["max_iter"].get<int>());
    double e = 0;
    for (std::size_t i = 0; i < mp.domain.size(); ++i)
      e = std::max(e, std::abs(ms.values[static_cast<Eigen::Index>(i)] - std::cos(mp.domain.nodes[i].x())));
    hs.push_back(1.0 / (n - 1));
    es.push_back(e);
    rows.push_back({{"n", n}, {"max_error", e}});
  }
  double worst_order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < es.size(); ++i) {
    double o = std::log(es[i - 1] / es[i]) / std::log(hs[i - 1] / hs[i]);
    rows[i]["order"] = o;
    worst_order = std::min(worst_order, o);
  }
  r.results = {{"closed_form", {{"exact", exact}, {"max_error", ce}, {"iterations", sol.iterations}}},
               {"refinement", rows},
               {"min_order", worst_order}};
  r.check("constant kernel closed form error", ce, 10 * tol / (1 - std::abs(lam)));
  r.check("observed order", worst_order, p["min_order"].get<double>() - p["order_slack"].get<double>(), true);
}

// ---- degree pipeline

HammersteinProblem interval_problem(std::function<double(const Point3&, const Point3&)> k,
                                    std::function<double(const Point3&, double)> psi, double c, double M, double lip) {
  HammersteinProblem p;
  p.domain = interval_domain(0, 1, 65);
  p.k = std::move(k);
  p.psi = std::move(psi);
  p.g = [c](const Point3&) { return c; };
  p.M = M;
  p.lipschitz = lip;
  return p;
}

json certificate_summary(const DegreeCertificate& c) {
  return {{"degree", c.degree}, {"N", c.N}, {"L_N", c.L_N}, {"tau_estimate", c.tau_estimate},
          {"sup_error_kernel", c.sup_error_kernel}, {"sup_error_offset", c.sup_error_offset},
          {"method", to_string(c.method)}, {"cross_check", c.cross_check}};
}

void degree_suite(const json& p, unsigned seed, SuiteReport& r) {
  const int samples = p["samples"].get<int>();
  r.results["basis_size_2"] = basis_size(2);
  r.check_bool("basis_size(2) = 10", basis_size(2) == 10);

  auto linear = [](double lam, double c) {
    return interval_problem([lam](const Point3&, const Point3&) { return lam; }, [](const Point3&, double s) { return s; },
                            c, 1.0, 1.0);
  };
  auto gauss = interval_problem([](const Point3& X, const Point3& Y) { return 0.4 * std::exp(-(X - Y).squaredNorm() / 4); },
                                [](const Point3&, double s) { return std::tanh(s); }, 0.3, 1.0, 1.0);
  json certs = json::array();
  auto certify = [&](const std::string& name, const HammersteinProblem& hp, int N, int expect) {
    auto c = leray_schauder_degree(hp, N, samples, seed);
    auto s = certificate_summary(c);
    s["case"] = name;
    r.check_bool(name + ": degree " + std::to_string(expect), c.degree == expect);
    r.check(name + ": kernel budget / (tau/3)", c.sup_error_kernel / (c.tau_estimate / 3), 1.0);
    r.check(name + ": offset budget / (tau/3)", c.sup_error_offset / (c.tau_estimate / 3), 1.0);
    if (c.degree != 0) {
      auto sol = existence_from_degree(c, hp);
      s["solution_residual"] = sol.residual_inf;
      r.check(name + ": solution residual", sol.residual_inf, 1e-10);
    }
    certs.push_back(s);
    return c.degree;
  };
  certify("constant kernel, lambda V = 0.5", linear(0.5, 0.2), 0, 1);
  for (int N : p["orders"].get<std::vector<int>>()) certify("gaussian tanh, N = " + std::to_string(N), gauss, N, 1);
  certify("constant kernel, lambda V = 2", linear(2.0, 0.0), 0, -1);

  auto base = interval_problem([](const Point3& X, const Point3& Y) { return 0.5 * std::exp(-(X - Y).squaredNorm()); },
                               [](const Point3&, double s) { return std::tanh(s); }, 0.2, 1.0, 1.0);
  const double tau = estimate_tau(base, samples, seed);
  const int d0 = leray_schauder_degree(base, 2, samples, seed).degree;
  json hom = json::array();
  for (double eta : p["homotopy_levels"].get<std::vector<double>>()) {
    auto hp = base;
    hp.psi = [eta](const Point3&, double s) { return std::tanh(s) + eta * s * s * s; };
    // sup|k| m(domain) sup|eta s^3| on |f| = M
    double shift = 0.5 * eta * std::pow(hp.M, 3);
    int d = leray_schauder_degree(hp, 2, samples, seed).degree;
    hom.push_back({{"eta", eta}, {"shift", shift}, {"degree", d}});
    r.check("homotopy eta = " + std::to_string(eta) + ": shift / tau", shift / tau, 1.0);
    r.check_bool("homotopy eta = " + std::to_string(eta) + ": degree unchanged", d == d0);
  }
  r.results["certificates"] = certs;
  r.results["homotopy"] = {{"tau", tau}, {"base_degree", d0}, {"levels", hom}};
}

// ---- semilinear solver

void convergence_suite(const json& p, unsigned, SuiteReport& r) {
  SemilinearProblem sp;
  sp.mesh = make_unit_sphere(p["level"].get<int>());
  sp.grid = make_volume_grid(sp.mesh, p["grid"].get<int>());
  sp.A1 = BoundaryField::Zero(static_cast<Eigen::Index>(sp.mesh.size()));
  auto ustar = [](const Point3& X) { return (1.0 - X.squaredNorm()) / 6.0; };
  sp.psi1 = [ustar](double u, const Point3&, const Point3& X) { return 1.0 + (u - ustar(X)); };
  sp.lipschitz_u = 1.0;
  sp.uses_gradient = false;
  sp.epsilon_schedule = default_epsilon_schedule(sp.grid);
  auto res = solve_semilinear(sp, p["tol"].get<double>(), p["max_outer"].get<int>());
  auto table = convergence_report(res.history);
  double err = 0.0;
  for (std::size_t c = 0; c < sp.grid.size(); ++c)
    err = std::max(err, std::abs(res.state.cell_u[static_cast<Eigen::Index>(c)] - ustar(sp.grid.centers[c])));
  const double rel = err / (1.0 / 6.0);

  r.results = {{"cells", sp.grid.size()},
               {"contraction_estimate", contraction_estimate(sp)},
               {"initial_residual_inf", res.history.initial_residual_inf},
               {"initial_residual_negnorm", res.history.initial_residual_negnorm},
               {"sweeps", res.history.iterations.size()},
               {"table", to_json(table)},
               {"field_rel_error", rel}};
  r.check_bool("status ok", table.status == "ok");
  r.check("final / initial negative-norm residual", table.final_over_initial, p["ratio"].get<double>());
  r.check("field relative sup error", rel, p["field_tol"].get<double>());
  r.check_bool("residual tail monotone (5% slack)", table.tail_monotone);

  std::ostringstream os;
  os.precision(17);
  os << "epsilon,residual_inf,residual_negnorm,contraction\n";
  for (const auto& row : table.rows)
    os << row.epsilon << ',' << row.residual_inf << ',' << row.residual_negnorm << ',' << row.contraction << '\n';
  r.tables.emplace_back("history.csv", history_csv(res.history));
  r.tables.emplace_back("table.csv", os.str());
}

struct Suite {
  json defaults;
  std::function<void(const json&, unsigned, SuiteReport&)> run;
  bool cli = true;
};

const std::map<std::string, Suite>& registry() {
  static const std::map<std::string, Suite> s = {
      {"solid-angle",
       {{{"level", 3}, {"interior", 10}, {"exterior", 10}, {"boundary", 10},
         {"tol_interior", 0.01}, {"tol_exterior", 0.05}, {"tol_boundary", 0.03}},
        solid_angle_suite}},
      {"jump-test", {{{"level", 4}, {"nodes", 10}, {"offset", 0.25}, {"tol", 0.05}}, jump_suite}},
      {"dtn", {{{"level", 3}, {"tol_linear", 0.02}, {"tol_quadratic", 0.03}, {"tol_homogeneous", 1e-10}}, dtn_suite}},
      {"poisson", {{{"level", 3}, {"grid", 16}, {"probes", 10}, {"probe_radius", 0.9}, {"tol", 0.03}}, poisson_suite}},
      {"symbols", {{{"spec", "all"}, {"xi_samples", 50}, {"tol", 1e-8}}, symbols_suite}},
      {"mollifier",
       {{{"pairs", 20}, {"fields", 100}, {"m1", 10}, {"tol_fourier", 1e-6}, {"decay", 0.1}}, mollifier_suite, false}},
      {"hammerstein-solve",
       {{{"lambda", 0.5}, {"c", 1.0}, {"M", 5.0}, {"n", 65}, {"levels", {17, 33, 65, 129}}, {"min_order", 2.0},
         {"order_slack", 0.05}, {"tol", 1e-12}, {"max_iter", 2000}, {"problem", nullptr}},
        hammerstein_solve_suite}},
      {"hammerstein-degree",
       {{{"samples", 200}, {"orders", {2, 3}}, {"homotopy_levels", {0.05, 0.1, 0.2, 0.3, 0.4}}}, degree_suite}},
      {"convergence",
       {{{"level", 3}, {"grid", 16}, {"tol", 1e-9}, {"max_outer", 40}, {"ratio", 1e-3}, {"field_tol", 0.03}},
        convergence_suite}},
  };
  return s;
}

const Suite& find(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) throw ConfigInvalid("unknown command: " + name);
  return it->second;
}

bool same_kind(const json& want, const json& got) {
  if (want.is_null()) return true;
  if (want.is_number_integer()) return got.is_number_integer();
  if (want.is_number()) return got.is_number();
  if (want.is_array()) {
    if (!got.is_array()) return false;
    for (const auto& e : got)
      if (!want.empty() && !same_kind(want.front(), e)) return false;
    return true;
  }
  return want.type() == got.type();
}

}  // namespace

void SuiteReport::check(const std::string& name, double value, double limit, bool at_least) {
  bool ok = std::isfinite(value) && (at_least ? value >= limit : value <= limit);
  checks.push_back({{"name", name}, {"value", value}, {at_least ? "min" : "max", limit}, {"pass", ok}});
  pass = pass && ok;
}

void SuiteReport::check_bool(const std::string& name, bool ok) {
  checks.push_back({{"name", name}, {"pass", ok}});
  pass = pass && ok;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

bool is_cli_command(const std::string& name) {
  auto it = registry().find(name);
  return it != registry().end() && it->second.cli;
}

json resolve_parameters(const std::string& suite, const json& params) {
  const Suite& s = find(suite);
  json out = s.defaults;
  if (params.is_null()) return out;
  if (!params.is_object()) throw ConfigInvalid("parameters must be an object");
  for (const auto& [key, value] : params.items()) {
    if (!s.defaults.contains(key)) throw ConfigInvalid("unknown parameter for " + suite + ": " + key);
    if (!same_kind(s.defaults[key], value)) throw ConfigInvalid("parameter " + key + " has the wrong type");
    out[key] = value;
  }
  for (const auto& [key, value] : out.items()) {
    if (value.is_number_integer() && value.get<long>() < 1) throw ConfigInvalid("parameter " + key + " must be >= 1");
    if (key.rfind("tol", 0) == 0 && !(value.get<double>() > 0.0)) throw ConfigInvalid("parameter " + key + " must be > 0");
  }
  if (out.contains("level") && out["level"].get<int>() > 6) throw ConfigInvalid("level must be <= 6");
  return out;
}

SuiteReport run_suite(const std::string& suite, const json& resolved, unsigned seed) {
  SuiteReport r;
  find(suite).run(resolved, seed, r);
  return r;
}

}  // namespace gie
