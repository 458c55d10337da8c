#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sympatch/mesh.hpp"

namespace sympatch {

/// One scalar condition at a node: either dir.A = value (+ lift) or psi = value.
/// A lifted condition adds -dir.g(x), where g is supplied when values are evaluated
/// (the incident field for scattered-field problems).
struct NodeConstraint {
  bool on_psi = false;
  Vec3 dir = Vec3::Zero();
  double value = 0.0;
  bool lifted = false;
};

struct ConstraintSpec {
  std::vector<std::vector<NodeConstraint>> per_node;

  explicit ConstraintSpec(std::size_t nodes = 0) : per_node(nodes) {}
  void add(int node, const NodeConstraint& c) { per_node.at(node).push_back(c); }
};

/// Outer patch face: A.e_axis = 0. Patch volume: psi = 0, extended to the outer-face nodes
/// when `psi_on_outer_face` is set.
ConstraintSpec apply_symmetry_patch(ConstraintSpec spec, const Mesh& mesh, bool psi_on_outer_face = true);

/// Symmetry planes without a patch: A.e_axis = 0 on every node of SYMMETRY_PLANE facets, psi left free.
ConstraintSpec apply_symmetry_plane(ConstraintSpec spec, const Mesh& mesh);

/// Tangential A vanishes (or equals minus the lifted field when `lifted`) and psi = 0 on every
/// node of facets with the given tag. Normals differing by more than 30 degrees at edges and
/// corners each contribute their own pair of tangents.
ConstraintSpec apply_pec(ConstraintSpec spec, const Mesh& mesh, BoundaryKind tag = BoundaryKind::PEC,
                         bool lifted = false);

/// psi = 0 on every node of facets with the given tag.
ConstraintSpec apply_psi_zero(ConstraintSpec spec, const Mesh& mesh, BoundaryKind tag);

/// Numbering of the four slots (A in a node frame, then psi) of every node.
/// A = R * Ahat with an orthonormal frame R per node; constrained frame components and
/// constrained psi slots are removed from the unknowns.
class DofMap {
 public:
  static constexpr int kSlots = 4;

  int node_count() const { return int(slots_.size()); }
  int free_count() const { return free_count_; }
  int constrained_count() const { return int(cslots_.size()); }

  /// Free index (>= 0) or -(constrained index + 1).
  int slot(int node, int s) const { return slots_[node][s]; }
  const Mat3& frame(int node) const { return frames_[node]; }
  bool rotated(int node) const { return rotated_[node]; }
  /// Node and local slot (frame component or 3 for psi) of a constrained index.
  std::pair<int, int> constrained_slot(int c) const { return {cslots_[c].node, cslots_[c].local}; }

  /// Values of all constrained slots, given the lift field g(x) (ignored when no constraint is lifted).
  template <class S>
  Eigen::Matrix<S, -1, 1> constrained_values(const Mesh& mesh,
                                             const std::function<Eigen::Matrix<S, 3, 1>(const Vec3&)>& g) const;
  template <class S>
  Eigen::Matrix<S, -1, 1> constrained_values(const Mesh& mesh) const;

  /// Nodal Cartesian values [Ax Ay Az psi] per node from free and constrained vectors.
  template <class S>
  Eigen::Matrix<S, -1, 1> expand(const Eigen::Matrix<S, -1, 1>& free,
                                 const Eigen::Matrix<S, -1, 1>& constrained) const;

  friend DofMap build_dof_map(const Mesh& mesh, const ConstraintSpec& spec);

 private:
  struct Term {
    int constraint;  // index into the node's constraint list
    double coef;
  };
  struct ConstrainedSlot {
    int node;
    int local;
    std::vector<Term> terms;
  };
  std::vector<std::array<int, 4>> slots_;
  std::vector<Mat3> frames_;
  std::vector<bool> rotated_;
  std::vector<ConstrainedSlot> cslots_;
  std::vector<std::vector<NodeConstraint>> constraints_;
  // Per node: constraint matrix D (rows d_k) and reconstruction check data.
  std::vector<Eigen::MatrixXd> residual_ops_;
  int free_count_ = 0;

  template <class S>
  void check_consistency(int node, const Eigen::Matrix<S, -1, 1>& v) const;
};

/// Throws ConstraintConflictError when one slot receives incompatible constant values.
DofMap build_dof_map(const Mesh& mesh, const ConstraintSpec& spec);

}  // namespace sympatch
