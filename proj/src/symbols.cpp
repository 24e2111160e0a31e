#include "gie/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <regex>

#include "gie/errors.hpp"

namespace gie {

namespace {

constexpr const char* kDerivNames[kSlots] = {"", "x", "y", "z", "xx", "xy", "xz", "yy", "yz", "zz"};

int natural_index(const Slot& s, int m) { return static_cast<int>(s.d) * m + s.component; }

Slot natural_slot(int n, int m) { return {n % m, static_cast<Deriv>(n / m)}; }

int permutation_sign(const std::vector<int>& p) {
  std::vector<bool> seen(p.size(), false);
  int sign = 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(p[j])) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

// Expression of every slot as a row over (Z1, S): 10m rows in natural order.
QMatrix slot_expressions(const ResolutionSpec& spec, const ParameterSet& p) {
  const int m = spec.m;
  QMatrix X(10 * m, 10 * m);
  auto unres = spec.unresolved();
  for (int n = 0; n < 10 * m; ++n) {
    Slot s = natural_slot(n, m);
    int j = spec.resolved_equation(s);
    if (j < 0) {
      X(n, spec.z1_position(s)) = 1;
      continue;
    }
    for (int k = 0; k < 9; ++k)
      for (int c = 0; c < m; ++c) X(n, k * m + c) = to_rational(p.C[static_cast<std::size_t>(k)](j, c));
    X(n, 9 * m + j) = 1;
  }
  return X;
}

Polynomial monomial_of(Deriv d) { return Polynomial::monomial(deriv_exponent(d)); }

}  // namespace

std::string deriv_name(Deriv d) { return kDerivNames[static_cast<int>(d)]; }

Exponent deriv_exponent(Deriv d) {
  switch (d) {
    case Deriv::U: return {0, 0, 0};
    case Deriv::X: return {1, 0, 0};
    case Deriv::Y: return {0, 1, 0};
    case Deriv::Z: return {0, 0, 1};
    case Deriv::XX: return {2, 0, 0};
    case Deriv::XY: return {1, 1, 0};
    case Deriv::XZ: return {1, 0, 1};
    case Deriv::YY: return {0, 2, 0};
    case Deriv::YZ: return {0, 1, 1};
    case Deriv::ZZ: return {0, 0, 2};
  }
  return {0, 0, 0};
}

int second_derivative_index(int j, int k) {
  if (j > k) std::swap(j, k);
  return 3 + k + (6 - j) * (j - 1) / 2;
}

void ResolutionSpec::validate() const {
  if (m < 1) throw InvalidSpec("m must be positive");
  if (static_cast<int>(resolved.size()) != m) throw InvalidSpec("need one resolved slot per equation");
  for (std::size_t a = 0; a < resolved.size(); ++a) {
    if (resolved[a].component < 0 || resolved[a].component >= m) throw InvalidSpec("component out of range");
    for (std::size_t b = 0; b < a; ++b)
      if (resolved[a] == resolved[b]) throw InvalidSpec("duplicate resolved slot");
  }
}

std::vector<Slot> ResolutionSpec::unresolved() const {
  std::vector<Slot> out;
  for (int d = 0; d < kSlots; ++d)
    for (int i = 0; i < m; ++i) {
      Slot s{i, static_cast<Deriv>(d)};
      if (resolved_equation(s) < 0) out.push_back(s);
    }
  return out;
}

int ResolutionSpec::z1_position(const Slot& s) const {
  if (resolved_equation(s) >= 0) return -1;
  int pos = 0;
  for (int d = 0; d < kSlots; ++d)
    for (int i = 0; i < m; ++i) {
      Slot t{i, static_cast<Deriv>(d)};
      if (t == s) return pos;
      if (resolved_equation(t) < 0) ++pos;
    }
  return -1;
}

int ResolutionSpec::resolved_equation(const Slot& s) const {
  for (std::size_t j = 0; j < resolved.size(); ++j)
    if (resolved[j] == s) return static_cast<int>(j);
  return -1;
}

Slot parse_slot(const std::string& name, int m) {
  static const std::regex re(R"(u(\d*)(?:_(xx|xy|xz|yy|yz|zz|x|y|z))?)");
  std::smatch mt;
  if (!std::regex_match(name, mt, re)) throw InvalidSpec("bad slot name: " + name);
  Slot s;
  if (mt[1].length() > 0) s.component = std::stoi(mt[1].str()) - 1;
  else if (m != 1) throw InvalidSpec("slot needs a component index when m > 1: " + name);
  std::string d = mt[2].str();
  for (int k = 0; k < kSlots; ++k)
    if (d == kDerivNames[k]) s.d = static_cast<Deriv>(k);
  if (s.component < 0 || s.component >= m) throw InvalidSpec("component out of range: " + name);
  return s;
}

std::string slot_name(const Slot& s, int m) {
  std::string n = "u";
  if (m > 1) n += std::to_string(s.component + 1);
  if (s.d != Deriv::U) n += "_" + deriv_name(s.d);
  return n;
}

ResolutionSpec spec_from_json(const nlohmann::json& j) {
  ResolutionSpec spec;
  try {
    spec.m = j.at("m").get<int>();
    for (const auto& r : j.at("resolved")) spec.resolved.push_back(parse_slot(r.get<std::string>(), spec.m));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("resolution spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ParameterSet ParameterSet::zeros(int m) {
  ParameterSet p;
  p.C.assign(9, Eigen::MatrixXd::Zero(m, m));
  return p;
}

SymbolMatrices build_symbol_matrices(const ResolutionSpec& spec, const ParameterSet& params) {
  spec.validate();
  const int m = spec.m, n9 = 9 * m;
  if (params.C.size() != 9) throw InvalidSpec("need 9 parameter matrices");
  for (const auto& c : params.C)
    if (c.rows() != m || c.cols() != m) throw InvalidSpec("parameter matrix shape must be m x m");

  QMatrix X = slot_expressions(spec, params);

  // target row of every derivative slot
  std::vector<int> free_u;  // Z1 positions of unresolved u slots
  for (int i = 0; i < m; ++i) {
    int p = spec.z1_position({i, Deriv::U});
    if (p >= 0) free_u.push_back(p);
  }
  std::vector<std::pair<Slot, int>> rows;
  std::size_t next_u = 0;
  for (std::size_t j = 0; j < spec.resolved.size(); ++j)
    if (spec.resolved[j].d != Deriv::U) rows.push_back({spec.resolved[j], free_u[next_u++]});
  for (const auto& s : spec.unresolved())
    if (s.d != Deriv::U) rows.push_back({s, spec.z1_position(s)});

  SymbolMatrices sm;
  sm.B1 = PolyMatrix(n9, n9);
  sm.B2 = PolyMatrix(n9, m);
  sm.alpha0 = PolyMatrix(n9, m);
  sm.A0 = QMatrix(m, n9);
  sm.A = QMatrix(n9, n9);
  sm.row_slots.assign(static_cast<std::size_t>(n9), Slot{});
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < n9; ++c) sm.A0(i, c) = X(natural_index({i, Deriv::U}, m), c);

  for (const auto& [slot, r] : rows) {
    sm.row_slots[static_cast<std::size_t>(r)] = slot;
    const int nu = natural_index({slot.component, Deriv::U}, m);
    const int nd = natural_index(slot, m);
    Polynomial sd = monomial_of(slot.d);
    sm.alpha0(r, slot.component) = sd;
    for (int c = 0; c < 10 * m; ++c) {
      Polynomial e = sd * Polynomial(X(nu, c)) - Polynomial(X(nd, c));
      if (c < n9) sm.B1(r, c) = e;
      else sm.B2(r, c - n9) = -e;
    }
    for (int c = 0; c < n9; ++c) sm.A(r, c) = X(nd, c);
  }
  return sm;
}

namespace {

void finish(SymbolicInverse& out, const PolyMatrix& adj, const PolyMatrix& B1) {
  if (out.det.is_zero()) throw SingularStructure("det(B1) vanishes identically");
  out.scale = out.det.leading_coefficient();
  out.a1 = out.det * (Rational(1) / out.scale);
  out.a1_B1_inv = Polynomial(Rational(1) / out.scale) * adj;
  const int n = B1.rows();
  if (!(out.a1_B1_inv * B1 == out.a1 * PolyMatrix::identity(n)))
    throw SingularStructure("inverse factor failed the exact residual check");
}

SymbolicInverse schur_route(const PolyMatrix& B1) {
  const int n = B1.rows();
  std::vector<int> cc, pc;
  for (int j = 0; j < n; ++j) {
    bool constant = true;
    for (int i = 0; i < n && constant; ++i) constant = B1(i, j).is_constant();
    (constant ? cc : pc).push_back(j);
  }
  if (pc.size() > 6) throw SingularStructure("too many polynomial columns for the Schur route");
  const int nc = static_cast<int>(cc.size()), np = static_cast<int>(pc.size());

  // greedy choice of rows making the constant block invertible
  std::vector<int> krows, rrows;
  std::vector<std::vector<Rational>> basis;  // echelon rows with pivot columns
  std::vector<int> pivots;
  for (int i = 0; i < n; ++i) {
    std::vector<Rational> v(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) v[static_cast<std::size_t>(c)] = B1(i, cc[static_cast<std::size_t>(c)]).constant_term();
    for (std::size_t b = 0; b < basis.size(); ++b) {
      auto pv = static_cast<std::size_t>(pivots[b]);
      if (v[pv] == 0) continue;
      Rational f = v[pv] / basis[b][pv];
      for (int c = 0; c < nc; ++c) v[static_cast<std::size_t>(c)] -= f * basis[b][static_cast<std::size_t>(c)];
    }
    int piv = -1;
    for (int c = 0; c < nc && piv < 0; ++c)
      if (v[static_cast<std::size_t>(c)] != 0) piv = c;
    if (piv >= 0 && static_cast<int>(krows.size()) < nc) {
      basis.push_back(v);
      pivots.push_back(piv);
      krows.push_back(i);
    } else {
      rrows.push_back(i);
    }
  }
  if (static_cast<int>(krows.size()) < nc) throw SingularStructure("constant columns are dependent");

  QMatrix Kn(nc, nc), R(np, nc);
  PolyMatrix Q(nc, np), T(np, np);
  for (int a = 0; a < nc; ++a) {
    for (int b = 0; b < nc; ++b) Kn(a, b) = B1(krows[a], cc[b]).constant_term();
    for (int b = 0; b < np; ++b) Q(a, b) = B1(krows[a], pc[b]);
  }
  for (int a = 0; a < np; ++a) {
    for (int b = 0; b < nc; ++b) R(a, b) = B1(rrows[a], cc[b]).constant_term();
    for (int b = 0; b < np; ++b) T(a, b) = B1(rrows[a], pc[b]);
  }
  QMatrix Kinv;
  if (!Kn.inverse(Kinv)) throw SingularStructure("constant block is singular");
  Rational detK = Kn.determinant();
  PolyMatrix Kp = PolyMatrix::from_rational(Kinv);
  PolyMatrix RK = PolyMatrix::from_rational(R * Kinv);
  PolyMatrix S = T - RK * Q;
  Polynomial detS = np > 0 ? determinant(S) : Polynomial(1);
  PolyMatrix adjS = np > 0 ? adjugate(S) : PolyMatrix(0, 0);

  std::vector<int> rord = krows, cord = cc;
  rord.insert(rord.end(), rrows.begin(), rrows.end());
  cord.insert(cord.end(), pc.begin(), pc.end());
  const int sgn = permutation_sign(rord) * permutation_sign(cord);

  SymbolicInverse out;
  out.route = "schur";
  out.det = Polynomial(Rational(sgn) * detK) * detS;

  PolyMatrix adjp(n, n);
  PolyMatrix KQ = Kp * Q;
  PolyMatrix tl = detS * Kp + KQ * adjS * RK;
  PolyMatrix tr = Polynomial(-1) * (KQ * adjS);
  PolyMatrix bl = Polynomial(-1) * (adjS * RK);
  for (int a = 0; a < nc; ++a) {
    for (int b = 0; b < nc; ++b) adjp(a, b) = tl(a, b);
    for (int b = 0; b < np; ++b) adjp(a, nc + b) = tr(a, b);
  }
  for (int a = 0; a < np; ++a) {
    for (int b = 0; b < nc; ++b) adjp(nc + a, b) = bl(a, b);
    for (int b = 0; b < np; ++b) adjp(nc + a, nc + b) = adjS(a, b);
  }
  PolyMatrix adj(n, n);
  const Polynomial f(Rational(sgn) * detK);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) adj(cord[b], rord[a]) = f * adjp(b, a);
  finish(out, adj, B1);
  return out;
}

}  // namespace

SymbolicInverse symbolic_det_and_inverse_factor(const PolyMatrix& B1) {
  if (B1.rows() != B1.cols()) throw SingularStructure("B1 must be square");
  return schur_route(B1);
}

SymbolicInverse symbolic_det_and_inverse_factor(const SymbolMatrices& sm) {
  const int n = sm.B1.rows(), m = sm.alpha0.cols();
  QMatrix Ainv;
  if (!sm.A.inverse(Ainv)) return schur_route(sm.B1);

  QMatrix A0p = sm.A0 * Ainv;
  PolyMatrix M = PolyMatrix::from_rational(A0p) * sm.alpha0 - PolyMatrix::identity(m);
  if (m > 6) throw SingularStructure("reduced block too large");
  Polynomial detM = determinant(M);
  PolyMatrix adjM = adjugate(M);
  Rational detA = sm.A.determinant();

  SymbolicInverse out;
  out.route = "woodbury";
  out.det = Polynomial(detA) * detM;
  PolyMatrix inner = sm.alpha0 * adjM * PolyMatrix::from_rational(A0p) - detM * PolyMatrix::identity(n);
  PolyMatrix adj = Polynomial(detA) * (PolyMatrix::from_rational(Ainv) * inner);
  finish(out, adj, sm.B1);
  return out;
}

ParameterSet derive_parameters(const ResolutionSpec& spec, const std::vector<Eigen::MatrixXd>& Cprime) {
  spec.validate();
  const int m = spec.m;
  if (Cprime.size() != 9) throw InvalidSpec("need 9 matrices C'");
  for (const auto& c : Cprime)
    if (c.rows() != m || c.cols() != m) throw InvalidSpec("C' matrices must be m x m");

  // (E, -C') in natural slot order, then columns permuted to (resolved, Z1)
  auto column = [&](const Slot& s) -> Eigen::VectorXd {
    if (s.d == Deriv::U) return Eigen::VectorXd::Unit(m, s.component);
    return -Cprime[static_cast<std::size_t>(static_cast<int>(s.d) - 1)].col(s.component);
  };
  Eigen::MatrixXd C2(m, 10 * m);
  for (int j = 0; j < m; ++j) C2.col(j) = column(spec.resolved[static_cast<std::size_t>(j)]);
  auto unres = spec.unresolved();
  for (int k = 0; k < 9 * m; ++k) C2.col(m + k) = column(unres[static_cast<std::size_t>(k)]);

  QMatrix Q = QMatrix::from_eigen(C2);
  QMatrix C1(m, m), C1inv;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) C1(a, b) = Q(a, b);
  if (!C1.inverse(C1inv)) throw NotInvertible("C''_1 is singular");

  ParameterSet p = ParameterSet::zeros(m);
  for (int k = 0; k < 9; ++k) {
    QMatrix Ck(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) Ck(a, b) = Q(a, m + k * m + b);
    p.C[static_cast<std::size_t>(k)] = -(C1inv * Ck).to_eigen();
  }

  try {
    SymbolicInverse si = symbolic_det_and_inverse_factor(build_symbol_matrices(spec, p));
    (void)si;
  } catch (const SingularStructure& e) {
    throw NotInvertible(std::string("derived parameters give a degenerate symbol: ") + e.what());
  }
  return p;
}

bool permutation_coherent(const ResolutionSpec& spec, const ParameterSet& params) {
  const int m = spec.m;
  QMatrix X = slot_expressions(spec, params);
  auto unres = spec.unresolved();
  for (int j = 0; j < m; ++j) {
    int n = natural_index(spec.resolved[static_cast<std::size_t>(j)], m);
    for (int k = 0; k < 9; ++k)
      for (int c = 0; c < m; ++c)
        if (X(n, k * m + c) != to_rational(params.C[static_cast<std::size_t>(k)](j, c))) return false;
  }
  for (int k = 0; k < 9 * m; ++k) {
    int n = natural_index(unres[static_cast<std::size_t>(k)], m);
    for (int c = 0; c < 9 * m; ++c)
      if (X(n, c) != (c == k ? 1 : 0)) return false;
  }
  return true;
}

namespace {

std::vector<Eigen::Vector3d> fibonacci_directions(int n) {
  std::vector<Eigen::Vector3d> d;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    double z = 1.0 - (2.0 * k + 1.0) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double t = golden * k;
    d.emplace_back(r * std::cos(t), r * std::sin(t), z);
  }
  return d;
}

}  // namespace

ConditionReport check_conditions(const Polynomial& a1, const PolyMatrix& a1_B1_inv, const PolyMatrix& a1_B1_inv_B2,
                                 const ConditionOptions& opt, bool throw_on_failure) {
  ConditionReport rep;
  rep.budget.a = std::max({0, a1_B1_inv.degree(), a1_B1_inv_B2.degree()});
  rep.budget.m1 = 6 + 2 * rep.budget.a;
  rep.det_degree = a1.degree();
  const int a = rep.budget.a;

  CompiledPolynomial ca1(a1);
  std::array<CompiledPolynomial, 3> grad;
  for (int k = 0; k < 3; ++k) grad[static_cast<std::size_t>(k)] = CompiledPolynomial(a1.derivative(k));
  std::vector<CompiledPolynomial> inv;
  for (int i = 0; i < a1_B1_inv.rows(); ++i)
    for (int j = 0; j < a1_B1_inv.cols(); ++j) inv.emplace_back(a1_B1_inv(i, j));
  const int maxdeg = std::max(a1.degree(), a1_B1_inv.degree());

  auto dirs = fibonacci_directions(opt.directions);
  const double dr = opt.radius / opt.radial_points;
  const double dw = 4.0 * std::numbers::pi / opt.directions;
  double integral = 0.0;
  bool near_zero = false;
  // first-order test: could a1 vanish within distance h of xi?
  auto check_zero = [&](const std::vector<std::array<std::complex<double>, 3>>& pw, double v, double h) {
    double g = 0.0;
    for (const auto& gk : grad) g += std::norm(gk.evaluate(pw));
    if (v <= 2.0 * std::sqrt(g) * h) near_zero = true;
  };
  rep.min_abs_a1 = std::numeric_limits<double>::infinity();
  rep.max_abs_a1 = 0.0;
  for (const auto& d : dirs)
    for (int l = 0; l < opt.radial_points; ++l) {
      double r = (l + 0.5) * dr;
      Eigen::Vector3d xi = r * d;
      auto pw = frequency_powers(xi, maxdeg);
      double v = std::abs(ca1.evaluate(pw));
      rep.min_abs_a1 = std::min(rep.min_abs_a1, v);
      rep.max_abs_a1 = std::max(rep.max_abs_a1, v);
      if (v > 0.0) {
        double nrm = 0.0;
        for (const auto& e : inv) nrm += std::norm(e.evaluate(pw));
        integral += dw * r * r * dr * std::pow(1.0 + r * r, -a - 3.0) * std::sqrt(nrm) / v;
      } else {
        integral = std::numeric_limits<double>::infinity();
      }
    }
  rep.radial_integral = integral;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(-opt.radius, opt.radius);
  const double ball = 4.0 / 3.0 * std::numbers::pi * std::pow(opt.radius, 3);
  const double hmc = std::cbrt(ball / opt.volume_samples);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(opt.volume_samples));
  while (static_cast<int>(vals.size()) < opt.volume_samples) {
    Eigen::Vector3d xi(U(rng), U(rng), U(rng));
    if (xi.norm() > opt.radius) continue;
    auto pw = frequency_powers(xi, a1.degree());
    double v = std::abs(ca1.evaluate(pw));
    check_zero(pw, v, hmc);
    vals.push_back(v);
  }
  std::sort(vals.begin(), vals.end());

  if (!near_zero) {
    rep.sublevel_exponent = std::numeric_limits<double>::infinity();
  } else {
    // log-log slope of vol{|a1| < t} against t at small volume fractions
    std::vector<double> lx, ly;
    for (double q : opt.quantiles) {
      auto k = static_cast<std::size_t>(q * static_cast<double>(vals.size()));
      double t = vals[std::min(k, vals.size() - 1)];
      if (t > 0.0) {
        lx.push_back(std::log(t));
        ly.push_back(std::log(q * ball));
      }
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.sublevel_exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  rep.local_integrability = rep.sublevel_exponent > opt.sublevel_threshold;
  rep.tail_exponent = a1_B1_inv.degree() - rep.det_degree - 2.0 * a - 6.0;
  rep.weighted_decay = rep.tail_exponent < -3.0 && rep.local_integrability && std::isfinite(integral);

  rep.samples = nlohmann::json::array();
  for (const Eigen::Vector3d& xi : {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 2, 2),
                                    Eigen::Vector3d(0.5, -0.3, 0.2)}) {
    auto v = a1.at_frequency(xi);
    rep.samples.push_back({{"xi", {xi[0], xi[1], xi[2]}}, {"a1_re", v.real()}, {"a1_im", v.imag()}});
  }

  if (throw_on_failure) {
    if (!rep.local_integrability) throw ConditionFailed("local_integrability", rep.sublevel_exponent);
    if (!rep.weighted_decay) throw ConditionFailed("weighted_decay", rep.tail_exponent);
  }
  return rep;
}

nlohmann::json to_json(const ConditionReport& r) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : "-inf";
  };
  return {{"det_degree", r.det_degree},
          {"a", r.budget.a},
          {"m1", r.budget.m1},
          {"conditions", {{"local_integrability", r.local_integrability}, {"weighted_decay", r.weighted_decay}}},
          {"sublevel_exponent", num(r.sublevel_exponent)},
          {"tail_exponent", r.tail_exponent},
          {"radial_integral", num(r.radial_integral)},
          {"min_abs_a1", r.min_abs_a1},
          {"max_abs_a1", r.max_abs_a1},
          {"sample_evaluations", r.samples}};
}

}  // namespace gie
