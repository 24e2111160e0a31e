#include "gie/degree.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "gie/errors.hpp"

namespace gie {

long basis_size(int N) { return basis_size(N, 3); }

long basis_size(int N, int dim) {
  if (N < 0) throw PreconditionViolated("N must be >= 0");
  if (dim < 1 || dim > 3) throw PreconditionViolated("dim must be 1, 2 or 3");
  long c = 1;
  for (int i = 1; i <= dim; ++i) c = c * (N + i) / i;
  return c;
}

Eigen::VectorXd MonomialBasis::evaluate(const Point3& X) const {
  Point3 t = (X - center).cwiseQuotient(half_width);
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  for (std::size_t a = 0; a < size(); ++a) {
    const auto& e = multi_indices[a];
    v[static_cast<Eigen::Index>(a)] = std::pow(t.x(), e[0]) * std::pow(t.y(), e[1]) * std::pow(t.z(), e[2]);
  }
  return v;
}

Eigen::MatrixXd MonomialBasis::design(const std::vector<Point3>& pts) const {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < pts.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = evaluate(pts[i]).transpose();
  return A;
}

MonomialBasis make_basis(int N, int dim, const Point3& lo, const Point3& hi) {
  if (N < 0) throw PreconditionViolated("N must be >= 0");
  if (dim < 1 || dim > 3) throw PreconditionViolated("dim must be 1, 2 or 3");
  MonomialBasis b;
  b.N = N;
  b.dim = dim;
  for (int k = 0; k < 3; ++k) {
    if (k < dim) {
      if (!(hi[k] > lo[k])) throw PreconditionViolated("empty fit box");
      b.center[k] = 0.5 * (lo[k] + hi[k]);
      b.half_width[k] = 0.5 * (hi[k] - lo[k]);
    } else {
      b.center[k] = 0.0;
      b.half_width[k] = 1.0;
    }
  }
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= (dim > 1 ? N - i : 0); ++j)
      for (int k = 0; k <= (dim > 2 ? N - i - j : 0); ++k) b.multi_indices.push_back({i, j, k});
  std::sort(b.multi_indices.begin(), b.multi_indices.end(), GrlexLess{});
  return b;
}

namespace {

std::vector<Point3> tensor_points(const Point3& lo, const Point3& hi, int dim, const std::vector<double>& t) {
  // t in [0, 1]; axes beyond dim stay at lo
  std::vector<Point3> pts;
  const int n = static_cast<int>(t.size());
  const int ny = dim > 1 ? n : 1, nz = dim > 2 ? n : 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k) {
        Point3 p = lo;
        p.x() += t[static_cast<std::size_t>(i)] * (hi.x() - lo.x());
        if (dim > 1) p.y() += t[static_cast<std::size_t>(j)] * (hi.y() - lo.y());
        if (dim > 2) p.z() += t[static_cast<std::size_t>(k)] * (hi.z() - lo.z());
        pts.push_back(p);
      }
  return pts;
}

int training_count(int N) {
  int n = std::max(4, 3 * (N + 1));
  return n + (n % 2);  // even, so the validation cell centres never hit a training node
}

struct MultiFit {
  MonomialBasis basis;
  Eigen::MatrixXd coeffs;  // L x columns
  double sup_error = 0.0;
  int nt = 0, nv = 0;
};

// one least-squares solve for several functions sampled on the same grids
template <class F>
MultiFit fit_columns(const F& eval_column, Eigen::Index columns, const Point3& lo, const Point3& hi, int dim, int N) {
  MultiFit out;
  out.basis = make_basis(N, dim, lo, hi);
  out.nt = training_count(N);
  out.nv = 4 * out.nt;
  auto train = training_grid(lo, hi, dim, out.nt);
  auto valid = validation_grid(lo, hi, dim, out.nv);

  Eigen::MatrixXd A = out.basis.design(train);
  Eigen::MatrixXd rhs(A.rows(), columns);
  for (Eigen::Index i = 0; i < A.rows(); ++i) rhs.row(i) = eval_column(train[static_cast<std::size_t>(i)]).transpose();
  out.coeffs = A.colPivHouseholderQr().solve(rhs);

  Eigen::MatrixXd V = out.basis.design(valid);
  Eigen::MatrixXd approx = V * out.coeffs;
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    Eigen::VectorXd exact = eval_column(valid[static_cast<std::size_t>(i)]);
    out.sup_error = std::max(out.sup_error, (approx.row(i).transpose() - exact).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace

std::vector<Point3> training_grid(const Point3& lo, const Point3& hi, int dim, int per_axis) {
  if (per_axis < 2) throw PreconditionViolated("training grid needs >= 2 points per axis");
  std::vector<double> t(static_cast<std::size_t>(per_axis));
  for (int i = 0; i < per_axis; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / (per_axis - 1);
  return tensor_points(lo, hi, dim, t);
}

std::vector<Point3> validation_grid(const Point3& lo, const Point3& hi, int dim, int per_axis) {
  if (per_axis < 1) throw PreconditionViolated("validation grid needs >= 1 point per axis");
  std::vector<double> t(static_cast<std::size_t>(per_axis));
  for (int i = 0; i < per_axis; ++i) t[static_cast<std::size_t>(i)] = (i + 0.5) / per_axis;
  return tensor_points(lo, hi, dim, t);
}

PolynomialFit fit_polynomial_approximation(const std::function<double(const Point3&)>& func, const Point3& lo,
                                           const Point3& hi, int dim, int N) {
  auto col = [&](const Point3& X) { return Eigen::VectorXd::Constant(1, func(X)); };
  MultiFit m = fit_columns(col, 1, lo, hi, dim, N);
  PolynomialFit f;
  f.basis = m.basis;
  f.coefficients = m.coeffs.col(0);
  f.sup_error = m.sup_error;
  f.training_points_per_axis = m.nt;
  f.validation_points_per_axis = m.nv;
  return f;
}

FiniteMap build_finite_map(const HammersteinProblem& p, const Eigen::MatrixXd& kernel_coeffs,
                           const MonomialBasis& basis, const Eigen::VectorXd& g_coeffs) {
  const auto L = static_cast<Eigen::Index>(basis.size());
  const auto n = static_cast<Eigen::Index>(p.domain.size());
  if (kernel_coeffs.rows() != L || kernel_coeffs.cols() != n) throw LengthMismatch("kernel coefficients must be L_N x nodes");
  if (g_coeffs.size() != L) throw LengthMismatch("offset coefficients must have length L_N");

  auto Xt = std::make_shared<Eigen::MatrixXd>(basis.design(p.domain.nodes));
  auto Cw = std::make_shared<Eigen::MatrixXd>(kernel_coeffs);
  for (Eigen::Index j = 0; j < n; ++j) Cw->col(j) *= p.domain.weights[static_cast<std::size_t>(j)];
  const double M = p.M;
  auto nodes = p.domain.nodes;
  auto psi = p.psi;

  FiniteMap m;
  m.dim = static_cast<int>(L);
  m.g = g_coeffs;
  m.gauge = [Xt, M](const Eigen::VectorXd& D) { return (*Xt * D).cwiseAbs().maxCoeff() / M; };
  m.phi = [Xt, Cw, M, nodes, psi](const Eigen::VectorXd& D) {
    Eigen::VectorXd s = *Xt * D;
    if (s.cwiseAbs().maxCoeff() > M * (1.0 + 1e-9)) throw RadiusExceeded("|X~^T D|_inf exceeds M");
    for (Eigen::Index j = 0; j < s.size(); ++j) s[j] = psi(nodes[static_cast<std::size_t>(j)], s[j]);
    return Eigen::VectorXd(*Cw * s);
  };
  return m;
}

std::string to_string(DegreeMethod m) {
  switch (m) {
    case DegreeMethod::Auto: return "Auto";
    case DegreeMethod::BoundarySign1D: return "BoundarySign1D";
    case DegreeMethod::JacobianSignSum: return "JacobianSignSum";
    case DegreeMethod::GridHomotopy: return "GridHomotopy";
  }
  return "?";
}

int degree_on_interval(const std::function<double(double)>& F, double a, double b) {
  if (!(b > a)) throw PreconditionViolated("empty interval");
  double fa = F(a), fb = F(b);
  if (fa == 0.0 || fb == 0.0) throw BoundaryZero("field vanishes at an interval endpoint");
  return ((fb > 0) - (fb < 0) - ((fa > 0) - (fa < 0))) / 2;
}

namespace {

constexpr double kBoundaryTol = 1e-8;
constexpr double kAngleMargin = 0.05;

struct Field {
  const FiniteMap& map;
  const Eigen::VectorXd& target;
  Eigen::VectorXd operator()(const Eigen::VectorXd& D) const { return D - map.phi(D) - target; }
  double scale(const Eigen::VectorXd& D, const Eigen::VectorXd& F) const {
    return D.norm() + (D - F - target).norm() + target.norm() + 1e-300;
  }
};

// boundary points D = w / gauge(w)
std::vector<Eigen::VectorXd> boundary_points(const FiniteMap& map, int samples, unsigned seed) {
  const int L = map.dim;
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < L; ++i)
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(L);
      e[i] = s;
      dirs.push_back(e);
    }
  if (L > 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> Z;
    for (int t = 0; t < samples; ++t) {
      Eigen::VectorXd w(L);
      for (int i = 0; i < L; ++i) w[i] = Z(rng);
      if (w.norm() > 0) dirs.push_back(w / w.norm());
    }
  }
  std::vector<Eigen::VectorXd> pts;
  for (const auto& w : dirs) {
    double gw = map.gauge(w);
    if (!(gw > 0.0)) throw PreconditionViolated("domain unbounded along a sampled direction");
    pts.push_back(w / gw);
  }
  return pts;
}

Eigen::MatrixXd fd_jacobian(const Field& F, const Eigen::VectorXd& D, const Eigen::VectorXd& F0, double radius) {
  const auto L = D.size();
  Eigen::MatrixXd J(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    double h = 1e-7 * (1.0 + std::abs(D[i]));
    Eigen::VectorXd Dp = D, Dm = D;
    Dp[i] += h;
    Dm[i] -= h;
    if (F.map.gauge(Dp) < radius && F.map.gauge(Dm) < radius) {
      J.col(i) = (F(Dp) - F(Dm)) / (2.0 * h);
    } else {  // one-sided towards the inside
      Eigen::VectorXd Dq = F.map.gauge(Dp) < radius ? Dp : Dm;
      double s = F.map.gauge(Dp) < radius ? h : -h;
      J.col(i) = (F(Dq) - F0) / s;
    }
  }
  return J;
}

struct JacobianResult {
  int degree = 0;
  std::vector<Eigen::VectorXd> roots;
};

JacobianResult jacobian_sign_sum(const Field& F, const DegreeOptions& opt) {
  const int L = F.map.dim;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> Z;
  std::uniform_real_distribution<double> U(0.0, 1.0);

  std::vector<Eigen::VectorXd> starts{Eigen::VectorXd::Zero(L)};
  if (F.map.gauge(F.target) < 1.0) starts.push_back(F.target);
  for (int t = 0; t < opt.starts_per_dim * L; ++t) {
    Eigen::VectorXd w(L);
    for (int i = 0; i < L; ++i) w[i] = Z(rng);
    double gw = F.map.gauge(w);
    if (!(gw > 0.0)) continue;
    double r = std::pow(U(rng), 1.0 / L) * 0.999;
    starts.push_back(w * (r / gw));
  }

  JacobianResult out;
  std::vector<int> signs;
  for (const auto& D0 : starts) {
    Eigen::VectorXd D = D0, R = F(D);
    bool found = false;
    for (int it = 0; it < 80; ++it) {
      if (R.norm() <= 1e-11 * F.scale(D, R)) {
        found = true;
        break;
      }
      Eigen::MatrixXd J = fd_jacobian(F, D, R, 1.0);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
      if (!lu.isInvertible()) break;
      Eigen::VectorXd step = lu.solve(-R);
      double lam = 1.0;
      bool moved = false;
      for (int b = 0; b < 40; ++b, lam *= 0.5) {
        Eigen::VectorXd Dn = D + lam * step;
        if (F.map.gauge(Dn) >= 1.0) continue;
        Eigen::VectorXd Rn = F(Dn);
        if (Rn.norm() < (1.0 - 1e-4 * lam) * R.norm()) {
          D = Dn;
          R = Rn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (!found) continue;
    bool dup = false;
    for (const auto& r : out.roots)
      if ((r - D).norm() <= 1e-6 * (1.0 + r.norm())) dup = true;
    if (dup) continue;
    Eigen::MatrixXd J = fd_jacobian(F, D, R, 1.0);
    double det = J.determinant();
    double jscale = std::pow(std::max(1.0, J.cwiseAbs().maxCoeff()), L);
    if (std::abs(det) <= 1e-9 * jscale) throw SolverInconsistent("degenerate root: Jacobian is singular");
    out.roots.push_back(D);
    signs.push_back(det > 0 ? 1 : -1);
  }
  for (int s : signs) out.degree += s;
  return out;
}

// Straight-line homotopy to +-(D - 0). It is admissible unless F(D) is
// (anti)parallel to D somewhere on the boundary.
std::optional<int> homotopy_degree(const Field& F, const std::vector<Eigen::VectorXd>& bpts) {
  double anti = 2.0, para = 2.0;
  for (const auto& D : bpts) {
    Eigen::VectorXd R = F(D);
    double c = R.dot(D) / (R.norm() * D.norm());
    anti = std::min(anti, 1.0 + c);
    para = std::min(para, 1.0 - c);
  }
  const int L = F.map.dim;
  const int minus = (L % 2 == 0) ? 1 : -1;
  bool to_plus = anti > kAngleMargin, to_minus = para > kAngleMargin;
  if (to_plus && to_minus) return minus == 1 ? std::optional<int>(1) : std::nullopt;
  if (to_plus) return 1;
  if (to_minus) return minus;
  return std::nullopt;
}

}  // namespace

DegreeResult brouwer_degree(const FiniteMap& map, const Eigen::VectorXd& target, const DegreeOptions& opt) {
  const int L = map.dim;
  if (L < 1) throw PreconditionViolated("map dimension must be >= 1");
  if (L > 4) throw DimensionTooHigh("L_N = " + std::to_string(L) + " > 4");
  if (target.size() != L) throw LengthMismatch("target length != map dimension");
  Field F{map, target};

  DegreeResult res;
  auto bpts = boundary_points(map, opt.boundary_samples, opt.seed);
  res.boundary_samples = static_cast<int>(bpts.size());
  res.boundary_min = std::numeric_limits<double>::infinity();
  for (const auto& D : bpts) {
    Eigen::VectorXd R = F(D);
    double rel = R.norm() / F.scale(D, R);
    res.boundary_min = std::min(res.boundary_min, R.norm());
    if (rel <= kBoundaryTol) throw BoundaryZero("field vanishes on the sampled boundary");
  }

  DegreeMethod method = opt.method;
  if (method == DegreeMethod::Auto) method = L == 1 ? DegreeMethod::BoundarySign1D : DegreeMethod::JacobianSignSum;
  res.method = method;
  auto hom = homotopy_degree(F, bpts);

  switch (method) {
    case DegreeMethod::BoundarySign1D: {
      if (L != 1) throw PreconditionViolated("boundary sign count needs L_N = 1");
      Eigen::VectorXd e = Eigen::VectorXd::Ones(1);
      double a = -1.0 / map.gauge(-e), b = 1.0 / map.gauge(e);
      auto f1 = [&](double d) { return F(Eigen::VectorXd::Constant(1, d))[0]; };
      res.degree = degree_on_interval(f1, a, b);
      res.cross_check = "n/a";
      break;
    }
    case DegreeMethod::JacobianSignSum: {
      auto jr = jacobian_sign_sum(F, opt);
      res.degree = jr.degree;
      res.roots = std::move(jr.roots);
      if (!hom) {
        res.cross_check = "inconclusive";
      } else if (*hom != res.degree) {
        throw SolverInconsistent("Jacobian sign sum " + std::to_string(res.degree) + " disagrees with homotopy degree " +
                                 std::to_string(*hom));
      } else {
        res.cross_check = "agree";
      }
      break;
    }
    case DegreeMethod::GridHomotopy: {
      if (!hom) throw SolverInconsistent("no admissible straight-line homotopy on the sampled boundary");
      res.degree = *hom;
      res.cross_check = "n/a";
      break;
    }
    case DegreeMethod::Auto: break;
  }
  return res;
}

DegreeCertificate leray_schauder_degree(const HammersteinProblem& p, int N, int samples, unsigned seed,
                                        const DegreeOptions& opt) {
  DegreeCertificate c;
  c.N = N;
  c.seed = seed;
  c.tau_samples = samples;
  c.tau_estimate = estimate_tau(p, samples, seed);
  if (!(c.tau_estimate > 0.0)) throw PreconditionViolated("tau estimate is not positive");
  const double budget = c.tau_estimate / 3.0;

  const int dim = p.domain.dim;
  const auto n = static_cast<Eigen::Index>(p.domain.size());
  auto kcol = [&](const Point3& X) {
    Eigen::VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = p.k(X, p.domain.nodes[static_cast<std::size_t>(j)]);
    return v;
  };
  MultiFit kf = fit_columns(kcol, n, p.domain.lo, p.domain.hi, dim, N);
  PolynomialFit gf = fit_polynomial_approximation(p.g, p.domain.lo, p.domain.hi, dim, N);

  double psi_sup = 0.0;
  for (const auto& Y : p.domain.nodes)
    for (int i = 0; i <= 200; ++i) psi_sup = std::max(psi_sup, std::abs(p.psi(Y, p.M * (-1.0 + i / 100.0))));

  c.basis = kf.basis;
  c.L_N = static_cast<long>(kf.basis.size());
  c.sup_error_kernel_raw = kf.sup_error;
  c.sup_error_kernel = kf.sup_error * psi_sup * p.domain.measure();
  c.sup_error_offset = gf.sup_error;
  c.training_points_per_axis = kf.nt;
  c.validation_points_per_axis = kf.nv;
  c.g_coeffs = gf.coefficients;
  if (c.sup_error_kernel > budget || c.sup_error_offset > budget)
    throw BudgetExceeded("fit errors (kernel " + std::to_string(c.sup_error_kernel) + ", offset " +
                         std::to_string(c.sup_error_offset) + ") exceed tau/3 = " + std::to_string(budget));

  FiniteMap m = build_finite_map(p, kf.coeffs, kf.basis, gf.coefficients);
  DegreeOptions o = opt;
  DegreeResult r = brouwer_degree(m, m.g, o);
  c.degree = r.degree;
  c.method = r.method;
  c.cross_check = r.cross_check;
  c.boundary_samples = r.boundary_samples;
  c.roots = r.roots;
  return c;
}

NystromSolution existence_from_degree(const DegreeCertificate& cert, const HammersteinProblem& p, double tol,
                                      int max_iter) {
  if (cert.degree == 0) throw PreconditionViolated("degree 0 certifies nothing");
  const auto n = static_cast<Eigen::Index>(p.domain.size());
  std::vector<Eigen::VectorXd> starts{Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd g = p.offset();
  auto clip = [&](Eigen::VectorXd v) { return Eigen::VectorXd(v.cwiseMax(-p.M).cwiseMin(p.M)); };
  starts.push_back(clip(g));
  if (!cert.basis.multi_indices.empty()) {
    Eigen::MatrixXd Xt = cert.basis.design(p.domain.nodes);
    for (const auto& D : cert.roots)
      if (D.size() == Xt.cols()) starts.push_back(clip(Xt * D));
  }
  for (double s : {0.5, -0.5}) starts.push_back(Eigen::VectorXd::Constant(n, s * p.M));

  for (const auto& f0 : starts) {
    PicardOptions o;
    o.best_effort = true;
    o.initial = f0;
    try {
      NystromSolution s = picard_solve(p, tol, max_iter, o);
      if (s.values.cwiseAbs().maxCoeff() <= p.M) return s;
    } catch (const MaxIterations&) {
    } catch (const RadiusExceeded&) {
    }
  }
  throw SolverInconsistent("degree " + std::to_string(cert.degree) + " but no start converged");
}

nlohmann::json to_json(const DegreeCertificate& c) {
  nlohmann::json idx = nlohmann::json::array();
  for (const auto& e : c.basis.multi_indices) idx.push_back({e[0], e[1], e[2]});
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& r : c.roots) roots.push_back(std::vector<double>(r.data(), r.data() + r.size()));
  return {{"degree", c.degree},
          {"tau_estimate", c.tau_estimate},
          {"budget", c.tau_estimate / 3.0},
          {"N", c.N},
          {"L_N", c.L_N},
          {"sup_error_kernel", c.sup_error_kernel},
          {"sup_error_kernel_raw", c.sup_error_kernel_raw},
          {"sup_error_offset", c.sup_error_offset},
          {"method", to_string(c.method)},
          {"cross_check", c.cross_check},
          {"boundary_samples", c.boundary_samples},
          {"tau_samples", c.tau_samples},
          {"training_points_per_axis", c.training_points_per_axis},
          {"validation_points_per_axis", c.validation_points_per_axis},
          {"seed", c.seed},
          {"multi_indices", idx},
          {"basis_center", {c.basis.center.x(), c.basis.center.y(), c.basis.center.z()}},
          {"basis_half_width", {c.basis.half_width.x(), c.basis.half_width.y(), c.basis.half_width.z()}},
          {"g_coeffs", std::vector<double>(c.g_coeffs.data(), c.g_coeffs.data() + c.g_coeffs.size())},
          {"roots", roots}};
}

}  // namespace gie
