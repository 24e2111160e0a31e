#pragma once

#include "gie/geometry.hpp"

namespace gie {

// Unnormalized: kernel 1/r (jumps of +-2*pi). Newton: h = 1/(4*pi*r) (jumps of +-1/2).
enum class KernelConvention { Unnormalized, Newton };

// Evaluation mode for a probe point.
//  Off:            off-surface probe; near triangles are integrated adaptively.
//  PrincipalValue: probe is a mesh node; node rule with the self weight dropped and
//                  replaced by a curvature-corrected self-disk value.
//  OnSurface:      probe is a mesh node; self weight dropped, adjacent triangles
//                  integrated adaptively (used when the density vanishes at the probe).
enum class Eval { Off, PrincipalValue, OnSurface };

struct NearField {
  double factor = 2.0;  // triangles closer than factor * diameter are refined
  int max_depth = 14;
};

// Gauss integral of d(1/r)/dn_P: -4*pi inside, -2*pi on the surface, 0 outside.
double solid_angle(const SurfaceMesh& mesh, const Point3& X, bool principal_value = false);
double absolute_solid_angle(const SurfaceMesh& mesh, const Point3& X, bool principal_value = false);

double single_layer(const SurfaceMesh& mesh, const BoundaryField& v, const Point3& X,
                    KernelConvention conv, bool principal_value = false);
// Unnormalized: integral of v d(1/r)/dn_P. Newton: integral of v grad_X h(X-P).n_P.
// The two differ by a factor -1/(4*pi).
double double_layer(const SurfaceMesh& mesh, const BoundaryField& v, const Point3& X,
                    KernelConvention conv, bool principal_value = false);

// Lower level entry points (Newton convention) with explicit mode.
double single_layer_eval(const SurfaceMesh& mesh, const BoundaryField& v, const Point3& X, Eval mode,
                         const NearField& nf = {});
double double_layer_eval(const SurfaceMesh& mesh, const BoundaryField& v, const Point3& X, Eval mode,
                         const NearField& nf = {});
Point3 single_layer_gradient(const SurfaceMesh& mesh, const BoundaryField& v, const Point3& X,
                             const NearField& nf = {});
Point3 double_layer_gradient(const SurfaceMesh& mesh, const BoundaryField& v, const Point3& X,
                             const NearField& nf = {});

// Newton potential sum h(X - c) f(c) vol. Near cells use their sub-samples,
// refined further around X; the box holding X takes the equal-volume ball
// value r_eq^2/2 * f.
double newton_potential(const VolumeGrid& grid, const Eigen::VectorXd& f, const Point3& X);
// gradient of the Newton potential; the box holding X contributes zero
Point3 newton_gradient(const VolumeGrid& grid, const Eigen::VectorXd& f, const Point3& X);
// per-cell coefficients: newton_potential(grid, f, X) = newton_weights(grid, X).dot(f)
Eigen::VectorXd newton_weights(const VolumeGrid& grid, const Point3& X);
Eigen::Matrix3Xd newton_gradient_weights(const VolumeGrid& grid, const Point3& X);

}  // namespace gie
