#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "sympatch/model.hpp"

namespace sympatch {

/// B27: triquadratic Lagrange hexahedron on [-1,1]^3.
/// W18: quadratic triangle (xi, eta >= 0, xi + eta <= 1) times quadratic line (zeta in [-1,1]).
enum class ElementKind { B27, W18 };

constexpr int node_count(ElementKind k) { return k == ElementKind::B27 ? 27 : 18; }
constexpr int face_count(ElementKind k) { return k == ElementKind::B27 ? 6 : 5; }
std::string_view to_string(ElementKind k);
ElementKind element_kind_from_string(std::string_view s);

struct ReferenceElement {
  ElementKind kind;
  int node_count;
  std::vector<Vec3> node_local_coords;
  /// Reference volume (8 for the hexahedron, 1 for the wedge).
  double volume;
};

const ReferenceElement& reference_element(ElementKind kind);

/// Whether a reference point lies in the element's reference domain, up to `tol`.
bool inside_reference(ElementKind kind, const Vec3& xi, double tol);

void shape_values(ElementKind kind, const Vec3& xi, std::span<double> out);
void shape_gradients(ElementKind kind, const Vec3& xi, std::span<Vec3> out);
std::vector<double> shape_values(ElementKind kind, const Vec3& xi);
std::vector<Vec3> shape_gradients(ElementKind kind, const Vec3& xi);

struct QuadratureRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
};

/// Tensor Gauss-Legendre (hex) or symmetric triangle rule times Gauss line (wedge).
/// `order` is the number of Gauss points per line direction and must be 2, 3 or 4.
const QuadratureRule& quadrature(ElementKind kind, int order);

/// n-point Gauss-Legendre rule on [-1,1], n = 1..6.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

/// Shape values and reference gradients evaluated at every point of a rule.
struct Tabulation {
  const QuadratureRule* rule;
  int nodes;
  std::vector<double> values;    // [q * nodes + i]
  std::vector<Vec3> ref_grads;   // [q * nodes + i]
};

const Tabulation& tabulate(ElementKind kind, int order);

/// Physical node coordinates of one element.
struct ElementGeometry {
  ElementKind kind;
  std::vector<Vec3> nodes;
  int id = -1;
};

struct MappedPoint {
  Vec3 x;
  Mat3 J;      // J(a, b) = dx_a / dxi_b
  double detJ;
  std::vector<Vec3> grads;   // physical shape gradients
};

/// Isoparametric map. Throws DegenerateElementError when detJ <= 0.
MappedPoint map_physical(const ElementGeometry& geom, const Vec3& xi);

/// Same, reusing precomputed shape data; writes physical gradients into `grads`.
void map_physical(const ElementGeometry& geom, std::span<const double> values,
                  std::span<const Vec3> ref_grads, Vec3& x, Mat3& J, double& detJ,
                  std::span<Vec3> grads);

// Faces. Hex faces 0..5: xi=-1, xi=+1, eta=-1, eta=+1, zeta=-1, zeta=+1.
// Wedge faces 0..4: zeta=-1 (tri), zeta=+1 (tri), eta=0 (quad), xi+eta=1 (quad), xi=0 (quad).

bool face_is_triangle(ElementKind kind, int face);
/// Local node indices on a face (9 for quadrilaterals, 6 for triangles).
const std::vector<int>& face_nodes(ElementKind kind, int face);
/// Corner (vertex) local nodes of a face, used for face identification.
const std::vector<int>& face_corners(ElementKind kind, int face);

/// Point on a face given face parameters. Quad faces use (s, t) in [-1,1]^2;
/// triangle faces use (s, t) with s, t >= 0, s + t <= 1.
Vec3 face_to_reference(ElementKind kind, int face, double s, double t);
/// Derivatives of face_to_reference with respect to s and t.
std::pair<Vec3, Vec3> face_tangents(ElementKind kind, int face);
/// Outward unit normal of the face in reference space.
Vec3 face_reference_normal(ElementKind kind, int face);

struct FaceQuadrature {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
};
/// 2D rule on a face: order x order Gauss for quads, symmetric triangle rule for triangles.
const FaceQuadrature& face_quadrature(ElementKind kind, int face, int order);

/// Physical quantities at a point on an element face.
struct FacePoint {
  Vec3 x;
  Vec3 normal;     // outward unit normal
  double dA;       // area element relative to the face parameter measure
  MappedPoint vol; // volume map at the same point
};

FacePoint map_face(const ElementGeometry& geom, int face, double s, double t);

}  // namespace sympatch
