#include "sympatch/dofmap.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "sympatch/errors.hpp"

namespace sympatch {

namespace {

void add_unique(ConstraintSpec& spec, int node, const NodeConstraint& c) {
  auto& list = spec.per_node.at(node);
  for (const auto& o : list)
    if (o.on_psi == c.on_psi && o.lifted == c.lifted && o.value == c.value && (o.dir - c.dir).norm() < 1e-14) return;
  list.push_back(c);
}

Vec3 snap(Vec3 v) {
  for (int i = 0; i < 3; ++i)
    if (std::abs(v[i]) < 1e-13) v[i] = 0.0;
  return v.normalized();
}

// Reference face parameters of a local element node lying on `face`.
std::pair<double, double> face_params(ElementKind kind, int face, int local) {
  const Vec3 xi = reference_element(kind).node_local_coords[local];
  const Vec3 o = face_to_reference(kind, face, 0.0, 0.0);
  const auto [ds, dt] = face_tangents(kind, face);
  Eigen::Matrix<double, 3, 2> B;
  B << ds, dt;
  const Eigen::Vector2d st = B.colPivHouseholderQr().solve(xi - o);
  return {st[0], st[1]};
}

bool axis_aligned(const Vec3& d) {
  int nz = 0;
  for (int i = 0; i < 3; ++i) nz += std::abs(d[i]) > 1e-12 * d.norm();
  return nz == 1;
}

}  // namespace

ConstraintSpec apply_symmetry_patch(ConstraintSpec spec, const Mesh& mesh, bool psi_on_outer_face) {
  if (spec.per_node.size() != mesh.nodes.size()) spec.per_node.resize(mesh.nodes.size());
  auto it = mesh.node_sets.find("patch_volume");
  if (it == mesh.node_sets.end() || it->second.empty()) throw MeshError("mesh has no patch_volume nodes");
  if (!mesh.has_tag(BoundaryKind::SymPatchOuter)) throw MeshError("mesh has no SYM_PATCH_OUTER facets");
  for (const auto& f : mesh.facets) {
    if (f.tag.kind != BoundaryKind::SymPatchOuter) continue;
    const Element& el = mesh.elements[f.element];
    for (int l : face_nodes(el.kind, f.face)) add_unique(spec, el.conn[l], {false, Vec3::Unit(f.tag.axis), 0.0, false});
  }
  for (int n : it->second) add_unique(spec, n, {true, Vec3::Zero(), 0.0, false});
  if (psi_on_outer_face)
    for (int n : mesh.facet_nodes(BoundaryKind::SymPatchOuter)) add_unique(spec, n, {true, Vec3::Zero(), 0.0, false});
  return spec;
}

ConstraintSpec apply_symmetry_plane(ConstraintSpec spec, const Mesh& mesh) {
  if (spec.per_node.size() != mesh.nodes.size()) spec.per_node.resize(mesh.nodes.size());
  if (!mesh.has_tag(BoundaryKind::SymmetryPlane)) throw MeshError("mesh has no SYMMETRY_PLANE facets");
  for (const auto& f : mesh.facets) {
    if (f.tag.kind != BoundaryKind::SymmetryPlane) continue;
    const Element& el = mesh.elements[f.element];
    for (int l : face_nodes(el.kind, f.face)) add_unique(spec, el.conn[l], {false, Vec3::Unit(f.tag.axis), 0.0, false});
  }
  return spec;
}

ConstraintSpec apply_pec(ConstraintSpec spec, const Mesh& mesh, BoundaryKind tag, bool lifted) {
  if (spec.per_node.size() != mesh.nodes.size()) spec.per_node.resize(mesh.nodes.size());
  std::vector<std::vector<Vec3>> normals(mesh.nodes.size());
  bool any = false;
  for (const auto& f : mesh.facets) {
    if (f.tag.kind != tag) continue;
    any = true;
    const ElementGeometry g = mesh.geometry(f.element);
    for (int l : face_nodes(g.kind, f.face)) {
      const auto [s, t] = face_params(g.kind, f.face, l);
      try {
        normals[mesh.elements[f.element].conn[l]].push_back(map_face(g, f.face, s, t).normal);
      } catch (const DegenerateElementError&) {
        // Collapsed corner: the other facets at this node supply its normals.
      }
    }
  }
  if (!any) throw MeshError("mesh has no facets tagged " + to_string(BoundaryTag{tag, -1}));
  // A node on a mirror plane only sees the facets on one side; adding their reflections gives
  // the normal the full mesh would have.
  std::vector<int> mirror_axis(mesh.nodes.size(), -1);
  for (const auto& f : mesh.facets) {
    if (f.tag.kind != BoundaryKind::SymmetryPlane && f.tag.kind != BoundaryKind::SymPatchOuter) continue;
    const Element& el = mesh.elements[f.element];
    if (f.tag.kind == BoundaryKind::SymmetryPlane)
      for (int l : face_nodes(el.kind, f.face)) mirror_axis[el.conn[l]] = f.tag.axis;
    else
      for (int n : el.conn) mirror_axis[n] = f.tag.axis;
  }
  for (std::size_t n = 0; n < normals.size(); ++n) {
    if (mirror_axis[n] < 0) continue;
    const std::size_t count = normals[n].size();
    for (std::size_t i = 0; i < count; ++i) {
      Vec3 m = normals[n][i];
      m[mirror_axis[n]] = -m[mirror_axis[n]];
      normals[n].push_back(m);
    }
  }
  const double cos30 = std::cos(std::numbers::pi / 6.0);
  for (std::size_t n = 0; n < normals.size(); ++n) {
    if (normals[n].empty()) continue;
    std::vector<Vec3> sums;
    for (const Vec3& nv : normals[n]) {
      bool merged = false;
      for (Vec3& s : sums)
        if (s.normalized().dot(nv) > cos30) {
          s += nv;
          merged = true;
          break;
        }
      if (!merged) sums.push_back(nv);
    }
    for (const Vec3& s : sums) {
      const Vec3 nn = snap(s);
      int least = 0;
      nn.cwiseAbs().minCoeff(&least);
      const Vec3 t1 = snap(nn.cross(Vec3::Unit(least)));
      const Vec3 t2 = snap(nn.cross(t1));
      add_unique(spec, int(n), {false, t1, 0.0, lifted});
      add_unique(spec, int(n), {false, t2, 0.0, lifted});
    }
    add_unique(spec, int(n), {true, Vec3::Zero(), 0.0, false});
  }
  return spec;
}

ConstraintSpec apply_psi_zero(ConstraintSpec spec, const Mesh& mesh, BoundaryKind tag) {
  if (spec.per_node.size() != mesh.nodes.size()) spec.per_node.resize(mesh.nodes.size());
  for (int n : mesh.facet_nodes(tag)) add_unique(spec, n, {true, Vec3::Zero(), 0.0, false});
  return spec;
}

DofMap build_dof_map(const Mesh& mesh, const ConstraintSpec& spec) {
  const int N = int(mesh.nodes.size());
  if (!spec.per_node.empty() && int(spec.per_node.size()) != N)
    throw ConstraintConflictError("constraint table does not match the mesh node count");
  DofMap dm;
  dm.slots_.resize(N);
  dm.frames_.assign(N, Mat3::Identity());
  dm.rotated_.assign(N, false);
  dm.constraints_.assign(N, {});
  dm.residual_ops_.assign(N, Eigen::MatrixXd());
  int next_free = 0;
  for (int n = 0; n < N; ++n) {
    const auto& list = spec.per_node.empty() ? dm.constraints_[n] : spec.per_node[n];
    dm.constraints_[n] = list;
    std::vector<int> a_idx, psi_idx;
    for (int k = 0; k < int(list.size()); ++k) (list[k].on_psi ? psi_idx : a_idx).push_back(k);

    std::array<bool, 3> constrained{false, false, false};
    Eigen::MatrixXd P;  // constrained components x A-constraints
    std::vector<int> comps;
    if (!a_idx.empty()) {
      Eigen::MatrixXd D(a_idx.size(), 3);
      for (std::size_t r = 0; r < a_idx.size(); ++r) D.row(r) = list[a_idx[r]].dir.transpose();
      bool aligned = true;
      for (int k : a_idx) aligned = aligned && axis_aligned(list[k].dir);
      Mat3 R = Mat3::Identity();
      if (aligned) {
        for (int k : a_idx) {
          int ax = 0;
          list[k].dir.cwiseAbs().maxCoeff(&ax);
          constrained[ax] = true;
        }
      } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-8 * sv[0];
        R = svd.matrixV();
        if (R.determinant() < 0) R.col(2) = -R.col(2);
        for (int i = 0; i < rank; ++i) constrained[i] = true;
        dm.rotated_[n] = true;
      }
      dm.frames_[n] = R;
      for (int i = 0; i < 3; ++i)
        if (constrained[i]) comps.push_back(i);
      Eigen::MatrixXd M(a_idx.size(), comps.size());
      for (std::size_t c = 0; c < comps.size(); ++c) M.col(c) = D * R.col(comps[c]);
      P = M.completeOrthogonalDecomposition().pseudoInverse();
      dm.residual_ops_[n] = M * P - Eigen::MatrixXd::Identity(a_idx.size(), a_idx.size());
      // Constant-valued conditions can be checked right away.
      bool any_lift = false;
      Eigen::VectorXd v(a_idx.size());
      for (std::size_t r = 0; r < a_idx.size(); ++r) {
        v[r] = list[a_idx[r]].value;
        any_lift = any_lift || list[a_idx[r]].lifted;
      }
      if (!any_lift && (dm.residual_ops_[n] * v).norm() > 1e-10 * std::max(1.0, v.norm()))
        throw ConstraintConflictError("incompatible vector-potential constraints at node " + std::to_string(n));
    }
    for (std::size_t i = 1; i < psi_idx.size(); ++i)
      if (list[psi_idx[i]].value != list[psi_idx[0]].value)
        throw ConstraintConflictError("conflicting psi values at node " + std::to_string(n));
    for (int k : psi_idx)
      if (list[k].lifted) throw ConstraintConflictError("lifted psi constraints are not supported");

    for (int s = 0; s < 3; ++s) {
      if (!constrained[s]) {
        dm.slots_[n][s] = next_free++;
        continue;
      }
      DofMap::ConstrainedSlot cs{n, s, {}};
      const int row = int(std::find(comps.begin(), comps.end(), s) - comps.begin());
      for (std::size_t r = 0; r < a_idx.size(); ++r)
        if (P(row, r) != 0.0) cs.terms.push_back({a_idx[r], P(row, r)});
      dm.slots_[n][s] = -int(dm.cslots_.size()) - 1;
      dm.cslots_.push_back(std::move(cs));
    }
    if (psi_idx.empty()) {
      dm.slots_[n][3] = next_free++;
    } else {
      dm.slots_[n][3] = -int(dm.cslots_.size()) - 1;
      dm.cslots_.push_back({n, 3, {{psi_idx[0], 1.0}}});
    }
  }
  dm.free_count_ = next_free;
  return dm;
}

template <class S>
void DofMap::check_consistency(int node, const Eigen::Matrix<S, -1, 1>& v) const {
  const auto& Q = residual_ops_[node];
  if (Q.size() == 0) return;
  const Eigen::Matrix<S, -1, 1> r = Q.template cast<S>() * v;
  if (r.norm() > 1e-8 * std::max(1.0, double(v.norm())))
    throw ConstraintConflictError("incompatible vector-potential constraint values at node " + std::to_string(node));
}

template <class S>
Eigen::Matrix<S, -1, 1> DofMap::constrained_values(
    const Mesh& mesh, const std::function<Eigen::Matrix<S, 3, 1>(const Vec3&)>& g) const {
  Eigen::Matrix<S, -1, 1> out(cslots_.size());
  std::size_t c = 0;
  std::vector<S> values;
  while (c < cslots_.size()) {
    const int n = cslots_[c].node;
    const auto& list = constraints_[n];
    values.assign(list.size(), S(0));
    bool need_g = false;
    for (const auto& k : list) need_g = need_g || k.lifted;
    Eigen::Matrix<S, 3, 1> gx = Eigen::Matrix<S, 3, 1>::Zero();
    if (need_g) {
      if (!g) throw ConstraintConflictError("lifted constraints need a lift field");
      gx = g(mesh.nodes[n]);
    }
    Eigen::Matrix<S, -1, 1> va;
    std::vector<S> a_vals;
    for (std::size_t k = 0; k < list.size(); ++k) {
      values[k] = S(list[k].value);
      if (list[k].lifted) values[k] -= list[k].dir.template cast<S>().dot(gx);
      if (!list[k].on_psi) a_vals.push_back(values[k]);
    }
    va = Eigen::Map<Eigen::Matrix<S, -1, 1>>(a_vals.data(), Eigen::Index(a_vals.size()));
    if (need_g) check_consistency<S>(n, va);
    for (; c < cslots_.size() && cslots_[c].node == n; ++c) {
      S v(0);
      for (const auto& t : cslots_[c].terms) v += t.coef * values[t.constraint];
      out[c] = v;
    }
  }
  return out;
}

template <class S>
Eigen::Matrix<S, -1, 1> DofMap::constrained_values(const Mesh& mesh) const {
  return constrained_values<S>(mesh, std::function<Eigen::Matrix<S, 3, 1>(const Vec3&)>());
}

template <class S>
Eigen::Matrix<S, -1, 1> DofMap::expand(const Eigen::Matrix<S, -1, 1>& free,
                                       const Eigen::Matrix<S, -1, 1>& constrained) const {
  if (free.size() != free_count_ || constrained.size() != constrained_count())
    throw DomainError("vector sizes do not match the dof map");
  const int N = node_count();
  Eigen::Matrix<S, -1, 1> out(4 * N);
  for (int n = 0; n < N; ++n) {
    Eigen::Matrix<S, 3, 1> local;
    for (int s = 0; s < 4; ++s) {
      const int id = slots_[n][s];
      const S v = id >= 0 ? free[id] : constrained[-id - 1];
      if (s < 3) local[s] = v;
      else out[4 * n + 3] = v;
    }
    out.template segment<3>(4 * n) = frames_[n].template cast<S>() * local;
  }
  return out;
}

template Eigen::VectorXd DofMap::constrained_values<double>(
    const Mesh&, const std::function<Eigen::Vector3d(const Vec3&)>&) const;
template Eigen::VectorXcd DofMap::constrained_values<cplx>(
    const Mesh&, const std::function<Eigen::Vector3cd(const Vec3&)>&) const;
template Eigen::VectorXd DofMap::constrained_values<double>(const Mesh&) const;
template Eigen::VectorXcd DofMap::constrained_values<cplx>(const Mesh&) const;
template Eigen::VectorXd DofMap::expand<double>(const Eigen::VectorXd&, const Eigen::VectorXd&) const;
template Eigen::VectorXcd DofMap::expand<cplx>(const Eigen::VectorXcd&, const Eigen::VectorXcd&) const;

}  // namespace sympatch
