#include "gie/hammerstein.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gie/errors.hpp"

namespace gie {

double Domain::measure() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

Domain interval_domain(double a, double b, int n) {
  if (n < 2 || !(b > a)) throw PreconditionViolated("interval needs b > a and n >= 2");
  Domain d;
  d.dim = 1;
  d.lo = Point3(a, 0, 0);
  d.hi = Point3(b, 0, 0);
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) {
    d.nodes.emplace_back(a + i * h, 0.0, 0.0);
    d.weights.push_back((i == 0 || i == n - 1) ? 0.5 * h : h);
  }
  return d;
}

Domain grid_domain(const VolumeGrid& g) {
  Domain d;
  d.dim = 3;
  d.nodes = g.centers;
  d.weights = g.weights;
  d.lo = g.box_lo;
  d.hi = g.box_hi;
  return d;
}

const Eigen::MatrixXd& HammersteinProblem::nystrom_matrix() const {
  const auto n = static_cast<Eigen::Index>(domain.size());
  if (!cache_.K || cache_.K->rows() != n) {
    auto K = std::make_shared<Eigen::MatrixXd>(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) (*K)(i, j) = domain.weights[j] * k(domain.nodes[i], domain.nodes[j]);
    cache_.K = K;
  }
  return *cache_.K;
}

Eigen::VectorXd HammersteinProblem::offset() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(domain.size()));
  for (std::size_t i = 0; i < domain.size(); ++i) v[static_cast<Eigen::Index>(i)] = g(domain.nodes[i]);
  return v;
}

Eigen::VectorXd apply_operator(const HammersteinProblem& p, const Eigen::VectorXd& f) {
  if (static_cast<std::size_t>(f.size()) != p.domain.size()) throw LengthMismatch("field length != node count");
  if (f.size() > 0 && f.cwiseAbs().maxCoeff() > p.M * (1.0 + 1e-12))
    throw RadiusExceeded("|f|_inf exceeds M");
  Eigen::VectorXd s(f.size());
  for (Eigen::Index j = 0; j < f.size(); ++j) s[j] = p.psi(p.domain.nodes[static_cast<std::size_t>(j)], f[j]);
  return p.nystrom_matrix() * s;
}

double residual_inf(const HammersteinProblem& p, const Eigen::VectorXd& f) {
  return (f - p.offset() - apply_operator(p, f)).cwiseAbs().maxCoeff();
}

double contraction_bound(const HammersteinProblem& p) {
  double ksup = 0.0;
  for (const auto& X : p.domain.nodes)
    for (const auto& Y : p.domain.nodes) ksup = std::max(ksup, std::abs(p.k(X, Y)));
  return ksup * p.lipschitz * p.domain.measure();
}

NystromSolution picard_solve(const HammersteinProblem& p, double tol, int max_iter, const PicardOptions& opt) {
  NystromSolution sol;
  sol.nodes = p.domain.nodes;
  sol.contraction_bound = contraction_bound(p);
  sol.certified = sol.contraction_bound < 1.0;
  if (!sol.certified && !opt.best_effort)
    throw NoContraction("contraction bound " + std::to_string(sol.contraction_bound) + " >= 1");

  const Eigen::VectorXd g = p.offset();
  Eigen::VectorXd f = opt.initial ? *opt.initial : Eigen::VectorXd::Zero(g.size());
  if (f.size() != g.size()) throw LengthMismatch("initial guess length != node count");
  double best = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int it = 0;; ++it) {
    Eigen::VectorXd Tf = apply_operator(p, f);
    double res = (f - g - Tf).cwiseAbs().maxCoeff();
    sol.values = f;
    sol.residual_inf = res;
    sol.iterations = it;
    if (res <= tol) return sol;
    if (it >= max_iter) throw MaxIterations("no convergence after " + std::to_string(it) + " iterations");
    if (res < 0.999 * best) {
      best = res;
      stall = 0;
    } else if (opt.best_effort && ++stall > 20) {
      throw MaxIterations("Picard iteration stagnated at residual " + std::to_string(res));
    }
    f = g + Tf;
    if (f.cwiseAbs().maxCoeff() > p.M) {
      if (!opt.best_effort) throw RadiusExceeded("iterate left the ball of radius M");
      throw MaxIterations("iterate left the ball of radius M");
    }
  }
}

double estimate_tau(const HammersteinProblem& p, int samples, unsigned seed) {
  if (samples < 1) throw PreconditionViolated("samples must be >= 1");
  const auto n = static_cast<Eigen::Index>(p.domain.size());
  const Eigen::VectorXd g = p.offset();
  auto gap = [&](const Eigen::VectorXd& f) { return (f - apply_operator(p, f) - g).cwiseAbs().maxCoeff(); };

  double best = std::numeric_limits<double>::infinity();
  for (double s : {1.0, -1.0}) best = std::min(best, gap(Eigen::VectorXd::Constant(n, s * p.M)));
  const Eigen::Index stride = std::max<Eigen::Index>(1, n / 32);
  for (Eigen::Index i = 0; i < n; i += stride)
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
      f[i] = s * p.M;
      best = std::min(best, gap(f));
    }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < samples; ++t) {
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) f[i] = U(rng);
    double mx = f.cwiseAbs().maxCoeff();
    if (mx == 0.0) continue;
    f *= p.M / mx;
    best = std::min(best, gap(f));
  }
  return best;
}

namespace {

double num(const nlohmann::json& j, const char* key, double dflt) { return j.contains(key) ? j.at(key).get<double>() : dflt; }

}  // namespace

HammersteinProblem problem_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> top = {"domain", "kernel", "psi", "g", "M"};
  for (const auto& [key, _] : j.items())
    if (std::find(top.begin(), top.end(), key) == top.end()) throw InvalidSpec("unknown problem key: " + key);
  HammersteinProblem p;
  try {
    p.M = j.at("M").get<double>();
    if (!(p.M > 0.0)) throw InvalidSpec("M must be positive");

    const auto& d = j.at("domain");
    std::string dt = d.at("type").get<std::string>();
    if (dt != "interval") throw InvalidSpec("unsupported domain type: " + dt);
    p.domain = interval_domain(num(d, "a", 0.0), num(d, "b", 1.0), d.value("n", 65));

    const auto& k = j.at("kernel");
    std::string kf = k.at("family").get<std::string>();
    if (kf == "constant") {
      double lam = k.at("lambda").get<double>();
      p.k = [lam](const Point3&, const Point3&) { return lam; };
    } else if (kf == "separable") {
      double lam = num(k, "lambda", 1.0), a = num(k, "a", 1.0), b = num(k, "b", 1.0);
      p.k = [lam, a, b](const Point3& X, const Point3& Y) { return lam * std::cos(a * X.x()) * std::cos(b * Y.x()); };
    } else if (kf == "gaussian") {
      double lam = num(k, "lambda", 1.0), w = num(k, "width", 1.0);
      p.k = [lam, w](const Point3& X, const Point3& Y) { return lam * std::exp(-(X - Y).squaredNorm() / (w * w)); };
    } else {
      throw InvalidSpec("unknown kernel family: " + kf);
    }

    const auto& s = j.at("psi");
    std::string sf = s.at("family").get<std::string>();
    double a = num(s, "a", 1.0), b = num(s, "b", 0.0);
    if (sf == "linear") {
      p.psi = [a](const Point3&, double v) { return a * v; };
      p.lipschitz = std::abs(a);
    } else if (sf == "cubic") {
      p.psi = [a, b](const Point3&, double v) { return a * v + b * v * v * v; };
      p.lipschitz = std::abs(a) + 3.0 * std::abs(b) * p.M * p.M;
    } else if (sf == "saturating") {
      p.psi = [a](const Point3&, double v) { return a * std::tanh(v); };
      p.lipschitz = std::abs(a);
    } else {
      throw InvalidSpec("unknown psi family: " + sf);
    }

    const auto& g = j.at("g");
    std::string gf = g.at("family").get<std::string>();
    double c = num(g, "c", 0.0), w = num(g, "omega", 1.0);
    if (gf == "constant") p.g = [c](const Point3&) { return c; };
    else if (gf == "zero") p.g = [](const Point3&) { return 0.0; };
    else if (gf == "cos") p.g = [c, w](const Point3& X) { return c * std::cos(w * X.x()); };
    else throw InvalidSpec("unknown offset family: " + gf);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("problem spec: ") + e.what());
  }
  return p;
}

}  // namespace gie
