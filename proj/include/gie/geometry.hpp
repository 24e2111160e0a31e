#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gie {

using Point3 = Eigen::Vector3d;
using BoundaryField = Eigen::VectorXd;

// Closed triangulated surface with vertex (Nystrom) quadrature.
struct SurfaceMesh {
  std::vector<Point3> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Point3> normals;  // unit, outward
  std::vector<double> weights;  // one third of incident triangle areas

  // derived by finalize()
  std::vector<double> tri_area;
  std::vector<Point3> tri_normal;  // flat facet normal
  std::vector<Point3> tri_centroid;
  std::vector<double> tri_radius;  // max centroid-to-vertex distance
  std::vector<double> spacing;     // per node: mean incident edge length
  std::vector<std::vector<int>> node_tris;
  std::vector<std::vector<int>> node_nbrs;

  std::size_t size() const { return nodes.size(); }
  double total_area() const;
  double mean_spacing() const;
};

// Recomputes facet data, weights, adjacency and spacing. Normals are
// recomputed (area-weighted facet average) unless keep_normals is set.
void finalize(SurfaceMesh& mesh, bool keep_normals = false);

SurfaceMesh make_mesh(std::vector<Point3> nodes, std::vector<std::array<int, 3>> triangles);
SurfaceMesh make_unit_sphere(int refinement_level);
SurfaceMesh make_sphere(int refinement_level, double radius, const Point3& center = Point3::Zero());

SurfaceMesh mesh_from_json(const nlohmann::json& j);
nlohmann::json mesh_to_json(const SurfaceMesh& mesh);

// every edge shared by exactly two triangles
bool is_watertight(const SurfaceMesh& mesh);

double surface_integral(const SurfaceMesh& mesh, const BoundaryField& values);

double point_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c);
// distance to the polyhedral surface; optionally the index of the closest triangle
double distance_to_surface(const SurfaceMesh& mesh, const Point3& X, int* closest_tri = nullptr);
int nearest_node(const SurfaceMesh& mesh, const Point3& X);

// Exact solid angle subtended by the polyhedron (4*pi inside, 0 outside).
double polyhedral_solid_angle(const SurfaceMesh& mesh, const Point3& X);

enum class Location { Interior, Exterior, Boundary };
std::string to_string(Location loc);
Location classify_point(const SurfaceMesh& mesh, const Point3& X);

// Cartesian cells clipped to a domain. Cells cut by the boundary keep only
// their interior sub-samples; weight = inside fraction * cell volume.
struct VolumeGrid {
  Point3 box_lo, box_hi;
  std::array<int, 3> shape{};
  Point3 h;  // cell size per axis
  std::vector<Point3> centers;
  std::vector<double> weights;
  std::vector<std::array<int, 3>> index;  // cell index in the box lattice
  std::vector<bool> cut;
  int sub = 4;
  // sub-sample points and weights per cell (interior ones only)
  std::vector<std::vector<Point3>> sub_points;
  double sub_weight = 0.0;

  std::size_t size() const { return centers.size(); }
  double volume() const;
  double cell_volume() const { return h.x() * h.y() * h.z(); }
};

VolumeGrid make_volume_grid(const SurfaceMesh& mesh, int n_per_axis, int sub = 4, double pad = 0.0);
VolumeGrid make_volume_grid(const std::function<bool(const Point3&)>& inside, const Point3& lo,
                            const Point3& hi, std::array<int, 3> shape, int sub = 4);

}  // namespace gie
