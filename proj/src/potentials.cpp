#include "gie/potentials.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "gie/errors.hpp"

namespace gie {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;

// 7-point degree-5 rule on the reference triangle (Dunavant)
struct TriPoint {
  double l0, l1, l2, w;
};
constexpr double kA1 = 0.059715871789770, kB1 = 0.470142064105115, kW1 = 0.132394152788506;
constexpr double kA2 = 0.797426985353087, kB2 = 0.101286507323456, kW2 = 0.125939180544827;
constexpr std::array<TriPoint, 7> kRule = {{{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
                                            {kA1, kB1, kB1, kW1},
                                            {kB1, kA1, kB1, kW1},
                                            {kB1, kB1, kA1, kW1},
                                            {kA2, kB2, kB2, kW2},
                                            {kB2, kA2, kB2, kW2},
                                            {kB2, kB2, kA2, kW2}}};

template <class T>
T zero();
template <>
double zero<double>() {
  return 0.0;
}
template <>
Point3 zero<Point3>() {
  return Point3::Zero();
}

int find_node(const SurfaceMesh& m, const Point3& X) {
  const double tol = 1e-12 * (1.0 + X.norm());
  for (std::size_t i = 0; i < m.size(); ++i)
    if ((m.nodes[i] - X).norm() <= tol) return static_cast<int>(i);
  return -1;
}

double density(const BoundaryField* v, int i) { return v ? (*v)[i] : 1.0; }

// Adaptive integral of density * kernel over one flat triangle. Density and
// normals are interpolated linearly from the vertices (normals renormalized).
template <class T, class K>
T integrate_triangle(const SurfaceMesh& m, int t, const BoundaryField* v, const Point3& X, const K& kern,
                     const NearField& nf) {
  const auto& tri = m.triangles[t];
  const Point3 P[3] = {m.nodes[tri[0]], m.nodes[tri[1]], m.nodes[tri[2]]};
  const Point3 N[3] = {m.normals[tri[0]], m.normals[tri[1]], m.normals[tri[2]]};
  const double V[3] = {density(v, tri[0]), density(v, tri[1]), density(v, tri[2])};

  struct Sub {
    Point3 b[3];
    int depth;
    double area;
  };
  std::vector<Sub> stack;
  stack.push_back({{Point3(1, 0, 0), Point3(0, 1, 0), Point3(0, 0, 1)}, 0, m.tri_area[t]});
  auto pos = [&](const Point3& b) { return b[0] * P[0] + b[1] * P[1] + b[2] * P[2]; };

  T acc = zero<T>();
  while (!stack.empty()) {
    Sub s = stack.back();
    stack.pop_back();
    Point3 q0 = pos(s.b[0]), q1 = pos(s.b[1]), q2 = pos(s.b[2]);
    Point3 c = (q0 + q1 + q2) / 3.0;
    double rad = std::max({(q0 - c).norm(), (q1 - c).norm(), (q2 - c).norm()});
    double size = std::max({(q1 - q0).norm(), (q2 - q1).norm(), (q0 - q2).norm()});
    double dist = (X - c).norm() - rad;
    if (s.depth < nf.max_depth && dist < nf.factor * size) {
      Point3 m01 = 0.5 * (s.b[0] + s.b[1]), m12 = 0.5 * (s.b[1] + s.b[2]), m20 = 0.5 * (s.b[2] + s.b[0]);
      double a4 = 0.25 * s.area;
      stack.push_back({{s.b[0], m01, m20}, s.depth + 1, a4});
      stack.push_back({{s.b[1], m12, m01}, s.depth + 1, a4});
      stack.push_back({{s.b[2], m20, m12}, s.depth + 1, a4});
      stack.push_back({{m01, m12, m20}, s.depth + 1, a4});
      continue;
    }
    for (const auto& g : kRule) {
      Point3 b = g.l0 * s.b[0] + g.l1 * s.b[1] + g.l2 * s.b[2];
      Point3 p = pos(b);
      if ((p - X).squaredNorm() == 0.0) continue;
      Point3 n = (b[0] * N[0] + b[1] * N[1] + b[2] * N[2]).normalized();
      double val = b[0] * V[0] + b[1] * V[1] + b[2] * V[2];
      acc += (g.w * s.area * val) * kern(p, n, X);
    }
  }
  return acc;
}

template <class T, class K>
T layer_sum(const SurfaceMesh& m, const BoundaryField* v, const Point3& X, const K& kern, Eval mode,
            const NearField& nf) {
  if (v && static_cast<std::size_t>(v->size()) != m.size())
    throw LengthMismatch("density length does not match node count");
  if (!X.allFinite()) throw PreconditionViolated("non-finite probe point");
  int self = find_node(m, X);
  if (self >= 0 && mode == Eval::Off)
    throw SingularEvaluation("probe coincides with mesh node " + std::to_string(self));
  if (self < 0) mode = Eval::Off;

  T acc = zero<T>();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (static_cast<int>(i) == self) continue;
    acc += (m.weights[i] * density(v, static_cast<int>(i))) * kern(m.nodes[i], m.normals[i], X);
  }
  if (mode == Eval::PrincipalValue) return acc + density(v, self) * kern.self_patch(m, self);

  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    double d = (X - m.tri_centroid[t]).norm() - m.tri_radius[t];
    if (d >= nf.factor * 2.0 * m.tri_radius[t]) continue;
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] == self) continue;
      acc -= (m.tri_area[t] / 3.0 * density(v, tri[k])) * kern(m.nodes[tri[k]], m.normals[tri[k]], X);
    }
    acc += integrate_triangle<T>(m, static_cast<int>(t), v, X, kern, nf);
  }
  return acc;
}

// radius of the disk with the node's quadrature area
double patch_radius(const SurfaceMesh& m, int i) { return std::sqrt(m.weights[i] / kPi); }

// mean of 2 (P_j - P_i).n_j / |P_j - P_i|^2 over neighbours; 1/R on a sphere of radius R
double node_curvature(const SurfaceMesh& m, int i) {
  double s = 0.0;
  for (int j : m.node_nbrs[i]) {
    Point3 r = m.nodes[j] - m.nodes[i];
    s += 2.0 * r.dot(m.normals[j]) / r.squaredNorm();
  }
  return m.node_nbrs[i].empty() ? 0.0 : s / static_cast<double>(m.node_nbrs[i].size());
}

// kernels without the 1/(4*pi) factor; self_patch is the integral over the
// dropped self disk for unit density
struct SingleK {
  double operator()(const Point3& P, const Point3&, const Point3& X) const { return 1.0 / (P - X).norm(); }
  double self_patch(const SurfaceMesh& m, int i) const { return 2.0 * kPi * patch_radius(m, i); }
};
// d(1/r)/dn_P
struct DoubleK {
  double operator()(const Point3& P, const Point3& n, const Point3& X) const {
    Point3 r = P - X;
    double d = r.norm();
    return -r.dot(n) / (d * d * d);
  }
  // kernel ~ -kappa / (2r) near the node
  double self_patch(const SurfaceMesh& m, int i) const { return -kPi * patch_radius(m, i) * node_curvature(m, i); }
};
struct AbsDoubleK {
  double operator()(const Point3& P, const Point3& n, const Point3& X) const {
    Point3 r = P - X;
    double d = r.norm();
    return std::abs(r.dot(n)) / (d * d * d);
  }
  double self_patch(const SurfaceMesh& m, int i) const {
    return kPi * patch_radius(m, i) * std::abs(node_curvature(m, i));
  }
};
// grad_X (1/r)
struct SingleGradK {
  Point3 operator()(const Point3& P, const Point3&, const Point3& X) const {
    Point3 r = P - X;
    double d = r.norm();
    return r / (d * d * d);
  }
  Point3 self_patch(const SurfaceMesh&, int) const { return Point3::Zero(); }
};
// grad_X of (P-X).n / r^3
struct DoubleGradK {
  Point3 operator()(const Point3& P, const Point3& n, const Point3& X) const {
    Point3 r = P - X;
    double d2 = r.squaredNorm(), d = std::sqrt(d2);
    double d3 = d2 * d;
    return -n / d3 + (3.0 * r.dot(n) / (d3 * d2)) * r;
  }
  Point3 self_patch(const SurfaceMesh&, int) const { return Point3::Zero(); }
};

Eval mode_for(bool pv) { return pv ? Eval::PrincipalValue : Eval::Off; }

}  // namespace

double solid_angle(const SurfaceMesh& m, const Point3& X, bool pv) {
  return layer_sum<double>(m, nullptr, X, DoubleK{}, mode_for(pv), {});
}

double absolute_solid_angle(const SurfaceMesh& m, const Point3& X, bool pv) {
  return layer_sum<double>(m, nullptr, X, AbsDoubleK{}, mode_for(pv), {});
}

double single_layer(const SurfaceMesh& m, const BoundaryField& v, const Point3& X, KernelConvention conv,
                    bool pv) {
  double s = layer_sum<double>(m, &v, X, SingleK{}, mode_for(pv), {});
  return conv == KernelConvention::Newton ? s / kFourPi : s;
}

double double_layer(const SurfaceMesh& m, const BoundaryField& v, const Point3& X, KernelConvention conv,
                    bool pv) {
  double s = layer_sum<double>(m, &v, X, DoubleK{}, mode_for(pv), {});
  return conv == KernelConvention::Newton ? -s / kFourPi : s;
}

double single_layer_eval(const SurfaceMesh& m, const BoundaryField& v, const Point3& X, Eval mode,
                         const NearField& nf) {
  return layer_sum<double>(m, &v, X, SingleK{}, mode, nf) / kFourPi;
}

double double_layer_eval(const SurfaceMesh& m, const BoundaryField& v, const Point3& X, Eval mode,
                         const NearField& nf) {
  return -layer_sum<double>(m, &v, X, DoubleK{}, mode, nf) / kFourPi;
}

Point3 single_layer_gradient(const SurfaceMesh& m, const BoundaryField& v, const Point3& X,
                             const NearField& nf) {
  return layer_sum<Point3>(m, &v, X, SingleGradK{}, Eval::Off, nf) / kFourPi;
}

Point3 double_layer_gradient(const SurfaceMesh& m, const BoundaryField& v, const Point3& X,
                             const NearField& nf) {
  return layer_sum<Point3>(m, &v, X, DoubleGradK{}, Eval::Off, nf) / kFourPi;
}

namespace {

// Integral of f * kernel over an axis-aligned box of half-widths hw centred at
// q. Boxes close to X are split 2x2x2; the box still holding X at the depth
// limit takes the equal-volume ball value (potential) or nothing (gradient).
template <class T, class Far, class Self>
T box_integral(const Point3& X, const Point3& q, const Point3& hw, int depth, const Far& far, const Self& self) {
  const double vol = 8.0 * hw.x() * hw.y() * hw.z();
  Point3 r = X - q;
  bool inside = std::abs(r.x()) <= hw.x() && std::abs(r.y()) <= hw.y() && std::abs(r.z()) <= hw.z();
  if (r.norm() > 4.0 * hw.norm() || (depth == 0 && !inside)) return far(r, vol);
  if (depth == 0) return self(vol);
  T acc = zero<T>();
  Point3 c = 0.5 * hw;
  for (int k = 0; k < 8; ++k) {
    Point3 o((k & 1) ? c.x() : -c.x(), (k & 2) ? c.y() : -c.y(), (k & 4) ? c.z() : -c.z());
    acc += box_integral<T>(X, q + o, c, depth - 1, far, self);
  }
  return acc;
}

constexpr int kBoxDepth = 4;

}  // namespace

double newton_potential(const VolumeGrid& g, const Eigen::VectorXd& f, const Point3& X) {
  if (static_cast<std::size_t>(f.size()) != g.size()) throw LengthMismatch("source length != cell count");
  const double near = 2.0 * g.h.norm();
  const Point3 hw = 0.5 * g.h / g.sub;
  auto far = [](const Point3& r, double vol) { return vol / (kFourPi * r.norm()); };
  auto self = [](double vol) {
    double req = std::cbrt(3.0 * vol / kFourPi);
    return 0.5 * req * req;
  };
  double acc = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    double fc = f[static_cast<Eigen::Index>(c)];
    double d = (X - g.centers[c]).norm();
    if (d > near) {
      acc += fc * g.weights[c] / (kFourPi * d);
      continue;
    }
    for (const auto& q : g.sub_points[c]) acc += fc * box_integral<double>(X, q, hw, kBoxDepth, far, self);
  }
  return acc;
}

Point3 newton_gradient(const VolumeGrid& g, const Eigen::VectorXd& f, const Point3& X) {
  if (static_cast<std::size_t>(f.size()) != g.size()) throw LengthMismatch("source length != cell count");
  const double near = 2.0 * g.h.norm();
  const Point3 hw = 0.5 * g.h / g.sub;
  auto far = [](const Point3& r, double vol) -> Point3 {
    double d = r.norm();
    return (-vol / (kFourPi * d * d * d)) * r;
  };
  auto self = [](double) -> Point3 { return Point3::Zero(); };
  Point3 acc = Point3::Zero();
  for (std::size_t c = 0; c < g.size(); ++c) {
    double fc = f[static_cast<Eigen::Index>(c)];
    Point3 r = X - g.centers[c];
    double d = r.norm();
    if (d > near) {
      acc -= (fc * g.weights[c] / (kFourPi * d * d * d)) * r;
      continue;
    }
    for (const auto& q : g.sub_points[c]) acc += fc * box_integral<Point3>(X, q, hw, kBoxDepth, far, self);
  }
  return acc;
}

Eigen::VectorXd newton_weights(const VolumeGrid& g, const Point3& X) {
  const double near = 2.0 * g.h.norm();
  const Point3 hw = 0.5 * g.h / g.sub;
  auto far = [](const Point3& r, double vol) { return vol / (kFourPi * r.norm()); };
  auto self = [](double vol) {
    double req = std::cbrt(3.0 * vol / kFourPi);
    return 0.5 * req * req;
  };
  Eigen::VectorXd w(static_cast<Eigen::Index>(g.size()));
  for (std::size_t c = 0; c < g.size(); ++c) {
    double d = (X - g.centers[c]).norm();
    double acc = 0.0;
    if (d > near) {
      acc = g.weights[c] / (kFourPi * d);
    } else {
      for (const auto& q : g.sub_points[c]) acc += box_integral<double>(X, q, hw, kBoxDepth, far, self);
    }
    w[static_cast<Eigen::Index>(c)] = acc;
  }
  return w;
}

Eigen::Matrix3Xd newton_gradient_weights(const VolumeGrid& g, const Point3& X) {
  const double near = 2.0 * g.h.norm();
  const Point3 hw = 0.5 * g.h / g.sub;
  auto far = [](const Point3& r, double vol) -> Point3 {
    double d = r.norm();
    return (-vol / (kFourPi * d * d * d)) * r;
  };
  auto self = [](double) -> Point3 { return Point3::Zero(); };
  Eigen::Matrix3Xd w(3, static_cast<Eigen::Index>(g.size()));
  for (std::size_t c = 0; c < g.size(); ++c) {
    Point3 r = X - g.centers[c];
    double d = r.norm();
    Point3 acc = Point3::Zero();
    if (d > near) {
      acc = (-g.weights[c] / (kFourPi * d * d * d)) * r;
    } else {
      for (const auto& q : g.sub_points[c]) acc += box_integral<Point3>(X, q, hw, kBoxDepth, far, self);
    }
    w.col(static_cast<Eigen::Index>(c)) = acc;
  }
  return w;
}

}  // namespace gie
