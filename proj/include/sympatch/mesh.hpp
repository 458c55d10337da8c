#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sympatch/elements.hpp"

namespace sympatch {

enum class BoundaryKind {
  PEC,
  ABC,
  SymPatchOuter,        // outer face of a thin symmetry patch; carries an axis
  DielectricInterface,  // interior facet between regions
  SymmetryPlane,        // flat symmetry face awaiting a patch; carries an axis
};

struct BoundaryTag {
  BoundaryKind kind = BoundaryKind::PEC;
  int axis = -1;  // 0, 1, 2 for SymPatchOuter and SymmetryPlane, else -1

  bool operator==(const BoundaryTag&) const = default;
  static BoundaryTag pec() { return {BoundaryKind::PEC, -1}; }
  static BoundaryTag abc() { return {BoundaryKind::ABC, -1}; }
  static BoundaryTag interface() { return {BoundaryKind::DielectricInterface, -1}; }
  static BoundaryTag patch_outer(int axis) { return {BoundaryKind::SymPatchOuter, axis}; }
  static BoundaryTag symmetry_plane(int axis) { return {BoundaryKind::SymmetryPlane, axis}; }
};

/// "PEC", "ABC", "DIELECTRIC_INTERFACE", "SYM_PATCH_OUTER_Y", "SYMMETRY_PLANE_Z", ...
std::string to_string(const BoundaryTag& tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

struct Element {
  ElementKind kind = ElementKind::B27;
  std::vector<int> conn;
  int region = 0;
};

struct BoundaryFacet {
  int element = -1;
  int face = -1;
  BoundaryTag tag;
};

struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Element> elements;
  std::vector<BoundaryFacet> facets;
  std::map<std::string, std::vector<int>> node_sets;
  std::map<std::string, std::vector<int>> element_sets;

  ElementGeometry geometry(int e) const;
  /// Bounding-box diagonal.
  double diameter() const;
  int count(ElementKind kind) const;
  bool has_tag(BoundaryKind kind) const;
  /// Sorted, deduplicated nodes of every facet carrying `kind`.
  std::vector<int> facet_nodes(BoundaryKind kind) const;
  /// Elements listed in element set "patch".
  std::vector<bool> patch_mask() const;
};

/// Sorted distinct corner nodes of an element face; collapsed faces give fewer than three.
std::vector<int> face_key(const Mesh& mesh, int element, int face);

struct FaceRef {
  int element;
  int face;
};

/// Faces that belong to exactly one element, skipping faces collapsed to an edge or point.
std::vector<FaceRef> boundary_faces(const Mesh& mesh);

struct MeshValidation {
  bool ok = true;
  double min_detJ = 0.0;
  int interior_faces = 0;
  int boundary_faces = 0;
  std::vector<std::string> problems;
};

/// Connectivity, Jacobian positivity at quadrature points, watertightness, tag coverage, duplicate nodes.
MeshValidation validate_mesh(const Mesh& mesh);

/// Plain-text mesh format; see README for the block layout.
void write_mesh(const Mesh& mesh, std::ostream& out);
Mesh read_mesh(std::istream& in);
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

struct LocatedPoint {
  int element;
  Vec3 xi;
};

/// Finds the element containing a physical point by box prefilter and Newton inversion.
class PointLocator {
 public:
  /// Elements flagged in `skip` are never returned.
  explicit PointLocator(const Mesh& mesh, std::vector<bool> skip = {});
  std::optional<LocatedPoint> locate(const Vec3& x) const;

 private:
  const Mesh* mesh_;
  std::vector<bool> skip_;
  std::vector<Vec3> lo_, hi_;
};

/// Newton inversion of the isoparametric map; returns nullopt when it fails to converge.
std::optional<Vec3> inverse_map(const ElementGeometry& geom, const Vec3& x);

}  // namespace sympatch
