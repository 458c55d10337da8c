#pragma once

#include <array>

#include "sympatch/mesh.hpp"

namespace sympatch {

enum class Span { Full, Half };

/// Element counts along r, theta and phi. For a half span, nphi covers [0, pi].
struct ShellDivisions {
  int nr = 1;
  int ntheta = 2;
  int nphi = 4;
};

/// Hollow sphere a <= r <= R_inf. Wedges touch the polar axis, hexahedra elsewhere.
/// Inner surface gets `inner`, outer surface ABC, and a half span tags its flat faces
/// SYMMETRY_PLANE_Y and lists their nodes in "symmetry_plane".
Mesh gen_spherical_shell(double a, double R_inf, ShellDivisions div, Span span,
                         BoundaryTag inner = BoundaryTag::pec());

/// Like the sphere, with inner surface x^2/a^2 + y^2/a^2 + z^2/c^2 = 1 blended linearly to r = R_inf.
Mesh gen_ellipsoidal_shell(double a, double c, double R_inf, ShellDivisions div, Span span,
                           BoundaryTag inner = BoundaryTag::pec());

/// Solid ball r <= a (region `inner_region`) inside a vacuum shell a <= r <= R_inf (region 0).
/// Radial counts are split as `n_inside` + `n_outside`; elements at the origin are collapsed.
/// Facets on r = a are tagged DIELECTRIC_INTERFACE.
Mesh gen_dielectric_sphere(double a, double R_inf, int n_inside, int n_outside, int ntheta, int nphi, Span span,
                           int inner_region = 1);

/// Box [0, L] with B27 elements; every face PEC.
Mesh gen_cuboid(const Vec3& lengths, const std::array<int, 3>& divisions);

/// Retags every facet lying on {x[axis] = value}. Returns the number of facets changed.
int retag_plane(Mesh& mesh, int axis, double value, BoundaryTag tag);

struct PatchPlane {
  int axis = 1;
  double value = 0.0;
};

/// Extrudes one layer of quadratic elements of the given thickness from the SYMMETRY_PLANE facets
/// on `plane`, away from the domain. Existing nodes and elements keep their indices.
Mesh attach_thin_patch(const Mesh& mesh, PatchPlane plane, double thickness);

struct MirroredPoint {
  Vec3 x;
  Vec3 signs;  // multiply vector field components by these
};

/// Reflection through the plane {x[axis] = value}.
MirroredPoint mirror_probe(const Vec3& x, int axis, double value = 0.0);

}  // namespace sympatch
