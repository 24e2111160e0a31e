#pragma once

#include <array>
#include <functional>
#include <string>

#include <json.hpp>

#include "gie/geometry.hpp"

namespace gie {

// Samples at cell centres of a uniform box lattice, row-major (x slowest).
struct GridFunction {
  Point3 lo, hi;
  std::array<int, 3> shape{};
  Point3 spacing;
  Eigen::VectorXd values;

  std::size_t size() const { return static_cast<std::size_t>(shape[0]) * shape[1] * shape[2]; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k;
  }
  Point3 center(int i, int j, int k) const;
  double cell_volume() const { return spacing.x() * spacing.y() * spacing.z(); }
  Point3 extent() const { return hi - lo; }
};

GridFunction make_grid_function(const Point3& lo, const Point3& hi, std::array<int, 3> shape);
GridFunction sample(const Point3& lo, const Point3& hi, std::array<int, 3> shape,
                    const std::function<double(const Point3&)>& f);
// zero outside the cells of the volume grid
GridFunction from_volume_grid(const VolumeGrid& grid, const Eigen::VectorXd& cell_values);
Eigen::VectorXd to_volume_grid(const GridFunction& f, const VolumeGrid& grid);

double sup_norm(const GridFunction& f);
double l2_norm(const GridFunction& f);

// delta_eps(X) = (pi eps)^{-3/2} exp(-|X|^2/eps)
double mollifier_density(double eps, const Point3& X);
// exp(-eps |xi|^2 / 4)
double mollifier_fourier(double eps, const Point3& xi);
// the same transform by direct quadrature (separable, trapezoid on +-12 sqrt(eps))
double mollifier_fourier_numeric(double eps, const Point3& xi, int points_per_axis = 801);

// Separable discrete Gaussian convolution, tails cut at 6 sqrt(eps) and
// renormalized to unit mass; zero extension outside the box.
GridFunction mollify(const GridFunction& f, double eps);

// Surrogate H^{-m1} norm: sqrt(sum_k |f^(xi_k)|^2 (1+|xi_k|^2)^{-m1} dxi / (2 pi)^3)
// over the DFT frequencies of the box. For m1 = 0 it equals the discrete L2 norm.
double negative_norm(const GridFunction& f, int m1);
// constant C with negative_norm(f, m1) <= C sup|f|
double negative_norm_bound(const GridFunction& f);

nlohmann::json to_json(const GridFunction& f);
void save_binary(const GridFunction& f, const std::string& path);
GridFunction load_binary(const std::string& path);

}  // namespace gie
