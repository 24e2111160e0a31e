#include "gie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "gie/errors.hpp"
#include "gie/potentials.hpp"

namespace gie {

double SurfaceMesh::total_area() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double SurfaceMesh::mean_spacing() const {
  if (spacing.empty()) return 0.0;
  double s = 0.0;
  for (double v : spacing) s += v;
  return s / static_cast<double>(spacing.size());
}

void finalize(SurfaceMesh& m, bool keep_normals) {
  const std::size_t nn = m.nodes.size(), nt = m.triangles.size();
  for (const auto& t : m.triangles)
    for (int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= nn) throw InvalidMesh("triangle index out of range");

  m.tri_area.assign(nt, 0.0);
  m.tri_normal.assign(nt, Point3::Zero());
  m.tri_centroid.assign(nt, Point3::Zero());
  m.tri_radius.assign(nt, 0.0);
  m.weights.assign(nn, 0.0);
  m.node_tris.assign(nn, {});
  m.node_nbrs.assign(nn, {});
  std::vector<Point3> acc(nn, Point3::Zero());

  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = m.triangles[t];
    const Point3 &a = m.nodes[tri[0]], &b = m.nodes[tri[1]], &c = m.nodes[tri[2]];
    Point3 cr = (b - a).cross(c - a);
    double area = 0.5 * cr.norm();
    if (!(area > 0.0)) throw InvalidMesh("degenerate triangle");
    m.tri_area[t] = area;
    m.tri_normal[t] = cr / cr.norm();
    m.tri_centroid[t] = (a + b + c) / 3.0;
    m.tri_radius[t] = std::max({(a - m.tri_centroid[t]).norm(), (b - m.tri_centroid[t]).norm(),
                                (c - m.tri_centroid[t]).norm()});
    for (int k = 0; k < 3; ++k) {
      m.weights[tri[k]] += area / 3.0;
      acc[tri[k]] += area * m.tri_normal[t];
      m.node_tris[tri[k]].push_back(static_cast<int>(t));
      for (int l = 0; l < 3; ++l)
        if (l != k) m.node_nbrs[tri[k]].push_back(tri[l]);
    }
  }
  m.spacing.assign(nn, 0.0);
  for (std::size_t i = 0; i < nn; ++i) {
    auto& nb = m.node_nbrs[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    double s = 0.0;
    for (int j : nb) s += (m.nodes[j] - m.nodes[i]).norm();
    m.spacing[i] = nb.empty() ? 0.0 : s / static_cast<double>(nb.size());
  }
  if (!keep_normals || m.normals.size() != nn) {
    m.normals.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      double len = acc[i].norm();
      if (!(len > 0.0)) throw InvalidMesh("isolated node");
      m.normals[i] = acc[i] / len;
    }
  }
}

SurfaceMesh make_mesh(std::vector<Point3> nodes, std::vector<std::array<int, 3>> triangles) {
  SurfaceMesh m;
  m.nodes = std::move(nodes);
  m.triangles = std::move(triangles);
  for (const auto& p : m.nodes)
    if (!p.allFinite()) throw InvalidMesh("non-finite node coordinate");
  finalize(m);
  if (!is_watertight(m)) throw InvalidMesh("surface is not watertight");
  return m;
}

SurfaceMesh make_sphere(int level, double radius, const Point3& center) {
  if (level < 0) throw PreconditionViolated("refinement level must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(f.size() * 4);
    for (const auto& tri : f) {
      int ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
      nf.push_back({tri[0], ab, ca});
      nf.push_back({tri[1], bc, ab});
      nf.push_back({tri[2], ca, bc});
      nf.push_back({ab, bc, ca});
    }
    f.swap(nf);
  }
  for (auto& tri : f) {
    Point3 n = (v[tri[1]] - v[tri[0]]).cross(v[tri[2]] - v[tri[0]]);
    if (n.dot(v[tri[0]] + v[tri[1]] + v[tri[2]]) < 0) std::swap(tri[1], tri[2]);
  }
  SurfaceMesh m;
  m.normals = v;
  m.nodes.reserve(v.size());
  for (const auto& p : v) m.nodes.push_back(center + radius * p);
  m.triangles = std::move(f);
  finalize(m, true);
  return m;
}

SurfaceMesh make_unit_sphere(int level) { return make_sphere(level, 1.0); }

SurfaceMesh mesh_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("triangles"))
    throw InvalidMesh("mesh JSON needs \"nodes\" and \"triangles\"");
  std::vector<Point3> nodes;
  for (const auto& p : j.at("nodes")) {
    if (!p.is_array() || p.size() != 3) throw InvalidMesh("node must be [x,y,z]");
    nodes.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  }
  std::vector<std::array<int, 3>> tris;
  for (const auto& t : j.at("triangles")) {
    if (!t.is_array() || t.size() != 3) throw InvalidMesh("triangle must be [i,j,k]");
    tris.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
  }
  return make_mesh(std::move(nodes), std::move(tris));
}

nlohmann::json mesh_to_json(const SurfaceMesh& m) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& p : m.nodes) j["nodes"].push_back({p.x(), p.y(), p.z()});
  j["triangles"] = nlohmann::json::array();
  for (const auto& t : m.triangles) j["triangles"].push_back({t[0], t[1], t[2]});
  return j;
}

bool is_watertight(const SurfaceMesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(t[k], t[(k + 1) % 3])];
  for (const auto& [e, c] : count)
    if (c != 2) return false;
  return !count.empty();
}

double surface_integral(const SurfaceMesh& m, const BoundaryField& values) {
  if (static_cast<std::size_t>(values.size()) != m.size())
    throw LengthMismatch("field length " + std::to_string(values.size()) + " != node count " +
                         std::to_string(m.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weights[i] * values[static_cast<Eigen::Index>(i)];
  return s;
}

// closest point on triangle (Ericson, Real-Time Collision Detection 5.1.5)
static Point3 closest_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  Point3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  Point3 bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + d1 / (d1 - d3) * ab;
  Point3 cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + d2 / (d2 - d6) * ac;
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b);
  double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  return (p - closest_on_triangle(p, a, b, c)).norm();
}

double distance_to_surface(const SurfaceMesh& m, const Point3& X, int* closest_tri) {
  double best = std::numeric_limits<double>::infinity();
  int bt = -1;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    if ((X - m.tri_centroid[t]).norm() - m.tri_radius[t] > best) continue;
    const auto& tri = m.triangles[t];
    double d = point_triangle_distance(X, m.nodes[tri[0]], m.nodes[tri[1]], m.nodes[tri[2]]);
    if (d < best) {
      best = d;
      bt = static_cast<int>(t);
    }
  }
  if (closest_tri) *closest_tri = bt;
  return best;
}

int nearest_node(const SurfaceMesh& m, const Point3& X) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    double d = (m.nodes[i] - X).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// Van Oosterom-Strackee signed solid angle of one triangle
static double triangle_solid_angle(const SurfaceMesh& m, int t, const Point3& X) {
  const auto& tri = m.triangles[t];
  Point3 r1 = m.nodes[tri[0]] - X, r2 = m.nodes[tri[1]] - X, r3 = m.nodes[tri[2]] - X;
  double l1 = r1.norm(), l2 = r2.norm(), l3 = r3.norm();
  double num = r1.dot(r2.cross(r3));
  double den = l1 * l2 * l3 + r1.dot(r2) * l3 + r1.dot(r3) * l2 + r2.dot(r3) * l1;
  return 2.0 * std::atan2(num, den);
}

double polyhedral_solid_angle(const SurfaceMesh& m, const Point3& X) {
  double total = 0.0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) total += triangle_solid_angle(m, static_cast<int>(t), X);
  return total;
}

std::string to_string(Location loc) {
  switch (loc) {
    case Location::Interior: return "Interior";
    case Location::Exterior: return "Exterior";
    case Location::Boundary: return "Boundary";
  }
  return "?";
}

Location classify_point(const SurfaceMesh& m, const Point3& X) {
  if (!X.allFinite()) throw PreconditionViolated("classify_point: non-finite point");
  int tri = -1;
  double d = distance_to_surface(m, X, &tri);
  const auto& t = m.triangles[tri];
  double local = (m.spacing[t[0]] + m.spacing[t[1]] + m.spacing[t[2]]) / 3.0;
  if (d <= local) return Location::Boundary;
  const double pi = std::numbers::pi;
  double w = solid_angle(m, X);
  if (std::abs(w + 4 * pi) <= pi / 2) return Location::Interior;
  if (std::abs(w) <= pi / 2) return Location::Exterior;
  if (std::abs(w + 2 * pi) <= pi / 2) return Location::Boundary;
  throw AmbiguousClassification("solid angle " + std::to_string(w) + " outside all bands");
}

double VolumeGrid::volume() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

VolumeGrid empty_grid(const Point3& lo, const Point3& hi, std::array<int, 3> shape, int sub) {
  if (sub < 1) throw PreconditionViolated("sub-sampling must be >= 1");
  for (int k = 0; k < 3; ++k)
    if (shape[k] < 1) throw PreconditionViolated("grid shape must be positive");
  VolumeGrid g;
  g.box_lo = lo;
  g.box_hi = hi;
  g.shape = shape;
  g.h = Point3((hi.x() - lo.x()) / shape[0], (hi.y() - lo.y()) / shape[1], (hi.z() - lo.z()) / shape[2]);
  g.sub = sub;
  g.sub_weight = g.cell_volume() / (sub * sub * sub);
  return g;
}

std::vector<Point3> cell_samples(const VolumeGrid& g, int i, int j, int k) {
  std::vector<Point3> pts;
  const int s = g.sub;
  pts.reserve(static_cast<std::size_t>(s * s * s));
  Point3 lo = g.box_lo + Point3(i * g.h.x(), j * g.h.y(), k * g.h.z());
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b)
      for (int c = 0; c < s; ++c)
        pts.push_back(lo + Point3((a + 0.5) / s * g.h.x(), (b + 0.5) / s * g.h.y(), (c + 0.5) / s * g.h.z()));
  return pts;
}

void add_cell(VolumeGrid& g, int i, int j, int k, std::vector<Point3> inside, bool cut) {
  if (inside.empty()) return;
  Point3 c = Point3::Zero();
  for (const auto& p : inside) c += p;
  c /= static_cast<double>(inside.size());
  g.centers.push_back(c);
  g.weights.push_back(g.sub_weight * static_cast<double>(inside.size()));
  g.index.push_back({i, j, k});
  g.cut.push_back(cut);
  g.sub_points.push_back(std::move(inside));
}

}  // namespace

VolumeGrid make_volume_grid(const std::function<bool(const Point3&)>& inside, const Point3& lo,
                            const Point3& hi, std::array<int, 3> shape, int sub) {
  VolumeGrid g = empty_grid(lo, hi, shape, sub);
  const std::size_t full = static_cast<std::size_t>(sub * sub * sub);
  for (int i = 0; i < shape[0]; ++i)
    for (int j = 0; j < shape[1]; ++j)
      for (int k = 0; k < shape[2]; ++k) {
        auto pts = cell_samples(g, i, j, k);
        std::vector<Point3> in;
        for (const auto& p : pts)
          if (inside(p)) in.push_back(p);
        bool cut = in.size() != full;
        add_cell(g, i, j, k, std::move(in), cut);
      }
  return g;
}

VolumeGrid make_volume_grid(const SurfaceMesh& m, int n, int sub, double pad) {
  if (n < 1) throw PreconditionViolated("grid resolution must be positive");
  Point3 lo = m.nodes[0], hi = m.nodes[0];
  for (const auto& p : m.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Point3 ext = hi - lo;
  double h = (ext.maxCoeff() + 2 * pad) / n;
  std::array<int, 3> shape{};
  for (int k = 0; k < 3; ++k) {
    shape[k] = std::max(1, static_cast<int>(std::ceil((ext[k] + 2 * pad) / h - 1e-9)));
    double mid = 0.5 * (lo[k] + hi[k]);
    lo[k] = mid - 0.5 * shape[k] * h;
    hi[k] = mid + 0.5 * shape[k] * h;
  }
  VolumeGrid g = empty_grid(lo, hi, shape, sub);
  const double half_diag = 0.5 * g.h.norm() * (1.0 + 1e-9);
  const double local_r = 4.0 * g.h.norm();
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<int> local;
  for (int i = 0; i < shape[0]; ++i)
    for (int j = 0; j < shape[1]; ++j)
      for (int k = 0; k < shape[2]; ++k) {
        Point3 c = g.box_lo + Point3((i + 0.5) * g.h.x(), (j + 0.5) * g.h.y(), (k + 0.5) * g.h.z());
        local.clear();
        for (std::size_t t = 0; t < m.triangles.size(); ++t)
          if ((c - m.tri_centroid[t]).norm() - m.tri_radius[t] < local_r) local.push_back(static_cast<int>(t));
        double d = std::numeric_limits<double>::infinity();
        for (int t : local) {
          const auto& tri = m.triangles[t];
          d = std::min(d, point_triangle_distance(c, m.nodes[tri[0]], m.nodes[tri[1]], m.nodes[tri[2]]));
        }
        auto pts = cell_samples(g, i, j, k);
        if (d > half_diag) {
          if (polyhedral_solid_angle(m, c) > two_pi) add_cell(g, i, j, k, std::move(pts), false);
          continue;
        }
        // winding number split into a far part frozen at the cell center and an
        // exact local part; the far part varies by well under 2*pi across a cell
        double far = 0.0;
        std::size_t li = 0;
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
          if (li < local.size() && local[li] == static_cast<int>(t)) {
            ++li;
            continue;
          }
          far += triangle_solid_angle(m, static_cast<int>(t), c);
        }
        std::vector<Point3> in;
        for (const auto& p : pts) {
          double w = far;
          for (int t : local) w += triangle_solid_angle(m, t, p);
          if (w > two_pi) in.push_back(p);
        }
        bool cut = in.size() != pts.size();
        add_cell(g, i, j, k, std::move(in), cut);
      }
  return g;
}

}  // namespace gie
