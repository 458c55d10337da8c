#include "sympatch/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "sympatch/errors.hpp"

namespace sympatch {

namespace {

using std::numbers::pi;

// Index of the reference node of `kind` at `xi`.
int local_node_at(ElementKind kind, const Vec3& xi) {
  const auto& ref = reference_element(kind);
  for (int i = 0; i < ref.node_count; ++i)
    if ((ref.node_local_coords[i] - xi).norm() < 1e-12) return i;
  throw MeshError("no reference node at requested position");
}

double center_detJ(const Mesh& mesh, const Element& el) {
  ElementGeometry g{el.kind, {}, -1};
  for (int n : el.conn) g.nodes.push_back(mesh.nodes[n]);
  const Vec3 c = el.kind == ElementKind::B27 ? Vec3::Zero() : Vec3(1.0 / 3.0, 1.0 / 3.0, 0.0);
  const auto gr = shape_gradients(el.kind, c);
  Mat3 J = Mat3::Zero();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) J += g.nodes[i] * gr[i].transpose();
  return J.determinant();
}

std::vector<Vec3> face_coords(const Mesh& mesh, int e, int f) {
  std::vector<Vec3> pts;
  for (int l : face_nodes(mesh.elements[e].kind, f)) pts.push_back(mesh.nodes[mesh.elements[e].conn[l]]);
  return pts;
}

void add_nodes_to_set(Mesh& mesh, const std::string& name, const std::vector<int>& ids) {
  auto& set = mesh.node_sets[name];
  set.insert(set.end(), ids.begin(), ids.end());
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

// Position of lattice node (i, theta, phi); i is the quadratic radial lattice index.
using PolarPosition = std::function<Vec3(int i, double theta, double phi)>;

// Quadratic (r, theta, phi) lattice with merged poles and an optionally merged origin.
Mesh build_polar(int nr, int ntheta, int nphi, Span span, const PolarPosition& pos, bool collapse_origin) {
  if (nr < 1 || ntheta < 2 || nphi < 1) throw MeshError("polar mesh needs nr >= 1, ntheta >= 2, nphi >= 1");
  if (span == Span::Full && nphi < 2) throw MeshError("full polar mesh needs nphi >= 2");
  const int J = 2 * ntheta, K = 2 * nphi;
  const double phi_span = span == Span::Full ? 2.0 * pi : pi;

  Mesh mesh;
  std::map<std::tuple<int, int, int>, int> ids;
  auto node = [&](int i, int j, int k) {
    if (span == Span::Full) k = ((k % K) + K) % K;
    std::tuple<int, int, int> key{i, j, k};
    if (collapse_origin && i == 0) key = {0, -1, -1};
    else if (j == 0 || j == J) key = {i, j, -1};
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    Vec3 x;
    const double theta = pi * j / J;
    if (span == Span::Full && k > nphi) {
      // Build the lower half as an exact mirror image of the upper half.
      x = pos(i, theta, phi_span * (K - k) / K);
      x.y() = -x.y();
    } else {
      x = pos(i, theta, phi_span * k / K);
    }
    if (k == 0 || (2 * k == K && span == Span::Full) || (k == K && span == Span::Half) || j == 0 || j == J)
      x.y() = 0.0;
    if (j == 0 || j == J) x.x() = 0.0;
    const int id = int(mesh.nodes.size());
    mesh.nodes.push_back(x);
    ids.emplace(key, id);
    return id;
  };

  const auto& hex_ref = reference_element(ElementKind::B27).node_local_coords;
  const auto& wedge_ref = reference_element(ElementKind::W18).node_local_coords;
  for (int ir = 0; ir < nr; ++ir)
    for (int it = 0; it < ntheta; ++it)
      for (int ip = 0; ip < nphi; ++ip) {
        const int i0 = 2 * ir, j0 = 2 * it, k0 = 2 * ip;
        Element el;
        if (it == 0 || it == ntheta - 1) {
          const bool north = it == 0;
          const int jp = north ? 0 : J, jr = north ? 1 : J - 1, j1 = north ? 2 : J - 2;
          // Triangle nodes v0 (pole), v1, v2, m01, m12, m20 as (j, k) pairs.
          std::array<std::array<int, 2>, 6> tri = {
              {{jp, k0}, {j1, k0}, {j1, k0 + 2}, {jr, k0}, {j1, k0 + 1}, {jr, k0 + 2}}};
          el.kind = ElementKind::W18;
          auto fill = [&] {
            el.conn.clear();
            for (const Vec3& r : wedge_ref) {
              int t = 0;
              if (r.x() == 1.0) t = 1;
              else if (r.y() == 1.0) t = 2;
              else if (r.x() == 0.5 && r.y() == 0.0) t = 3;
              else if (r.x() == 0.5 && r.y() == 0.5) t = 4;
              else if (r.x() == 0.0 && r.y() == 0.5) t = 5;
              el.conn.push_back(node(i0 + int(r.z()) + 1, tri[t][0], tri[t][1]));
            }
          };
          fill();
          if (center_detJ(mesh, el) < 0) {
            std::swap(tri[1], tri[2]);
            std::swap(tri[3], tri[5]);
            fill();
          }
        } else {
          el.kind = ElementKind::B27;
          bool flip = false;
          auto fill = [&] {
            el.conn.clear();
            for (const Vec3& r : hex_ref) {
              const int c = flip ? 1 - int(r.z()) : int(r.z()) + 1;
              el.conn.push_back(node(i0 + int(r.x()) + 1, j0 + int(r.y()) + 1, k0 + c));
            }
          };
          fill();
          if (center_detJ(mesh, el) < 0) {
            flip = true;
            fill();
          }
        }
        mesh.elements.push_back(std::move(el));
      }
  return mesh;
}

using FaceClassifier = std::function<std::optional<BoundaryTag>(const std::vector<Vec3>&)>;

void tag_boundary(Mesh& mesh, const FaceClassifier& classify) {
  for (const auto& ref : boundary_faces(mesh)) {
    const auto tag = classify(face_coords(mesh, ref.element, ref.face));
    if (!tag) throw MeshError("unclassified boundary face on element " + std::to_string(ref.element));
    mesh.facets.push_back({ref.element, ref.face, *tag});
  }
  std::vector<int> plane;
  for (const auto& f : mesh.facets)
    if (f.tag.kind == BoundaryKind::SymmetryPlane)
      for (int l : face_nodes(mesh.elements[f.element].kind, f.face)) plane.push_back(mesh.elements[f.element].conn[l]);
  if (!plane.empty()) add_nodes_to_set(mesh, "symmetry_plane", plane);
}

template <class Pred>
bool all_of(const std::vector<Vec3>& pts, Pred p) {
  return std::all_of(pts.begin(), pts.end(), p);
}

Mesh shell(double a, double c, double R_inf, ShellDivisions div, Span span, BoundaryTag inner) {
  if (!(a > 0.0) || !(c > 0.0)) throw MeshError("inner semi-axes must be positive");
  if (!(R_inf > std::max(a, c))) throw MeshError("truncation radius must exceed the scatterer size");
  const int I = 2 * div.nr;
  auto pos = [=](int i, double theta, double phi) {
    const double s = double(i) / I;
    const Vec3 dir(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
    const Vec3 p_in(a * dir.x(), a * dir.y(), c * dir.z());
    return Vec3((1.0 - s) * p_in + s * R_inf * dir);
  };
  Mesh mesh = build_polar(div.nr, div.ntheta, div.nphi, span, pos, false);
  const double tol = 1e-9 * R_inf;
  tag_boundary(mesh, [&](const std::vector<Vec3>& pts) -> std::optional<BoundaryTag> {
    if (all_of(pts, [&](const Vec3& x) { return std::abs(x.norm() - R_inf) < tol; })) return BoundaryTag::abc();
    if (all_of(pts, [&](const Vec3& x) {
          return std::abs((x.x() * x.x() + x.y() * x.y()) / (a * a) + x.z() * x.z() / (c * c) - 1.0) < 1e-9;
        }))
      return inner;
    if (span == Span::Half && all_of(pts, [&](const Vec3& x) { return x.y() == 0.0; }))
      return BoundaryTag::symmetry_plane(1);
    return std::nullopt;
  });
  return mesh;
}

}  // namespace

Mesh gen_spherical_shell(double a, double R_inf, ShellDivisions div, Span span, BoundaryTag inner) {
  return shell(a, a, R_inf, div, span, inner);
}

Mesh gen_ellipsoidal_shell(double a, double c, double R_inf, ShellDivisions div, Span span, BoundaryTag inner) {
  return shell(a, c, R_inf, div, span, inner);
}

Mesh gen_dielectric_sphere(double a, double R_inf, int n_inside, int n_outside, int ntheta, int nphi, Span span,
                           int inner_region) {
  if (!(a > 0.0) || !(R_inf > a)) throw MeshError("need 0 < a < R_inf");
  if (n_inside < 1 || n_outside < 1) throw MeshError("radial divisions must be positive");
  const int Iin = 2 * n_inside, Iout = 2 * n_outside;
  auto pos = [=](int i, double theta, double phi) {
    const double r = i <= Iin ? a * i / Iin : a + (R_inf - a) * (i - Iin) / Iout;
    return Vec3(r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), r * std::cos(theta));
  };
  Mesh mesh = build_polar(n_inside + n_outside, ntheta, nphi, span, pos, true);
  const int per_shell = ntheta * nphi;
  for (int e = 0; e < int(mesh.elements.size()); ++e)
    mesh.elements[e].region = e / per_shell < n_inside ? inner_region : 0;
  const double tol = 1e-9 * R_inf;
  tag_boundary(mesh, [&](const std::vector<Vec3>& pts) -> std::optional<BoundaryTag> {
    if (all_of(pts, [&](const Vec3& x) { return std::abs(x.norm() - R_inf) < tol; })) return BoundaryTag::abc();
    if (span == Span::Half && all_of(pts, [&](const Vec3& x) { return x.y() == 0.0; }))
      return BoundaryTag::symmetry_plane(1);
    return std::nullopt;
  });
  for (int e = 0; e < int(mesh.elements.size()); ++e) {
    if (mesh.elements[e].region != inner_region) continue;
    for (int f = 0; f < face_count(mesh.elements[e].kind); ++f) {
      if (face_key(mesh, e, f).size() < 3) continue;
      if (all_of(face_coords(mesh, e, f), [&](const Vec3& x) { return std::abs(x.norm() - a) < tol; }))
        mesh.facets.push_back({e, f, BoundaryTag::interface()});
    }
  }
  return mesh;
}

Mesh gen_cuboid(const Vec3& lengths, const std::array<int, 3>& divisions) {
  for (int d = 0; d < 3; ++d) {
    if (divisions[d] < 1) throw MeshError("cuboid divisions must be at least 1");
    if (!(lengths[d] > 0.0)) throw MeshError("cuboid lengths must be positive");
  }
  Mesh mesh;
  const int nx = 2 * divisions[0] + 1, ny = 2 * divisions[1] + 1, nz = 2 * divisions[2] + 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.nodes.emplace_back(lengths.x() * i / (nx - 1), lengths.y() * j / (ny - 1), lengths.z() * k / (nz - 1));
  const auto& ref = reference_element(ElementKind::B27).node_local_coords;
  for (int ez = 0; ez < divisions[2]; ++ez)
    for (int ey = 0; ey < divisions[1]; ++ey)
      for (int ex = 0; ex < divisions[0]; ++ex) {
        Element el{ElementKind::B27, {}, 0};
        for (const Vec3& r : ref) {
          const int i = 2 * ex + int(r.x()) + 1, j = 2 * ey + int(r.y()) + 1, k = 2 * ez + int(r.z()) + 1;
          el.conn.push_back((k * ny + j) * nx + i);
        }
        mesh.elements.push_back(std::move(el));
      }
  tag_boundary(mesh, [](const std::vector<Vec3>&) { return std::optional<BoundaryTag>(BoundaryTag::pec()); });
  return mesh;
}

int retag_plane(Mesh& mesh, int axis, double value, BoundaryTag tag) {
  if (axis < 0 || axis > 2) throw DomainError("axis must be 0, 1 or 2");
  const double tol = 1e-9 * mesh.diameter();
  int changed = 0;
  std::vector<int> plane_nodes;
  for (auto& f : mesh.facets) {
    const auto pts = face_coords(mesh, f.element, f.face);
    if (!all_of(pts, [&](const Vec3& x) { return std::abs(x[axis] - value) <= tol; })) continue;
    f.tag = tag;
    ++changed;
    for (int l : face_nodes(mesh.elements[f.element].kind, f.face))
      plane_nodes.push_back(mesh.elements[f.element].conn[l]);
  }
  if (tag.kind == BoundaryKind::SymmetryPlane && !plane_nodes.empty())
    add_nodes_to_set(mesh, "symmetry_plane", plane_nodes);
  return changed;
}

Mesh attach_thin_patch(const Mesh& mesh, PatchPlane plane, double thickness) {
  if (!(thickness > 0.0)) throw DomainError("patch thickness must be positive");
  if (plane.axis < 0 || plane.axis > 2) throw DomainError("patch axis must be 0, 1 or 2");
  const double tol = 1e-9 * mesh.diameter();

  std::vector<int> selected;
  double side = 0.0;
  for (int i = 0; i < int(mesh.facets.size()); ++i) {
    const auto& f = mesh.facets[i];
    if (f.tag.kind != BoundaryKind::SymmetryPlane || f.tag.axis != plane.axis) continue;
    const auto pts = face_coords(mesh, f.element, f.face);
    if (!all_of(pts, [&](const Vec3& x) { return std::abs(x[plane.axis] - plane.value) <= tol; })) continue;
    const ElementGeometry g = mesh.geometry(f.element);
    const bool tri = face_is_triangle(g.kind, f.face);
    const auto fp = map_face(g, f.face, tri ? 1.0 / 3.0 : 0.0, tri ? 1.0 / 3.0 : 0.0);
    if (std::abs(std::abs(fp.normal[plane.axis]) - 1.0) > 1e-6)
      throw MeshError("symmetry-plane face is not parallel to the patch plane");
    const double s = fp.normal[plane.axis] > 0 ? 1.0 : -1.0;
    if (side != 0.0 && s != side) throw MeshError("symmetry-plane faces point to both sides of the plane");
    side = s;
    selected.push_back(i);
  }
  if (selected.empty()) throw MeshError("no symmetry-plane facets on the requested patch plane");

  Mesh out = mesh;
  std::map<int, int> mid, outer;
  auto layer_node = [&](int g, int layer) {
    if (layer == 0) return g;
    auto& table = layer == 1 ? mid : outer;
    auto it = table.find(g);
    if (it != table.end()) return it->second;
    Vec3 x = mesh.nodes[g];
    x[plane.axis] = plane.value + side * thickness * (layer == 1 ? 0.5 : 1.0);
    const int id = int(out.nodes.size());
    out.nodes.push_back(x);
    table.emplace(g, id);
    return id;
  };

  const int first_new = int(out.elements.size());
  std::vector<int> plane_nodes;
  for (int fi : selected) {
    const auto& f = mesh.facets[fi];
    const Element& src = mesh.elements[f.element];
    const ElementKind kind = face_is_triangle(src.kind, f.face) ? ElementKind::W18 : ElementKind::B27;
    Element el{kind, {}, src.region};
    bool swap = false;
    auto fill = [&] {
      el.conn.clear();
      for (const Vec3& r : reference_element(kind).node_local_coords) {
        const double s = swap ? r.y() : r.x(), t = swap ? r.x() : r.y();
        const int local = local_node_at(src.kind, face_to_reference(src.kind, f.face, s, t));
        el.conn.push_back(layer_node(src.conn[local], int(r.z()) + 1));
      }
    };
    fill();
    if (center_detJ(out, el) < 0) {
      swap = true;
      fill();
    }
    for (int l : face_nodes(src.kind, f.face)) plane_nodes.push_back(src.conn[l]);
    out.elements.push_back(std::move(el));
  }

  // Outer faces, and side faces on the rim of the plane.
  std::set<int> selected_set(selected.begin(), selected.end());
  std::map<int, std::vector<int>> node_to_facets;
  for (int i = 0; i < int(mesh.facets.size()); ++i) {
    if (selected_set.count(i)) continue;
    for (int n : face_key(mesh, mesh.facets[i].element, mesh.facets[i].face)) node_to_facets[n].push_back(i);
  }
  std::map<std::vector<int>, std::vector<FaceRef>> sides;
  for (int e = first_new; e < int(out.elements.size()); ++e) {
    const ElementKind kind = out.elements[e].kind;
    const int top = kind == ElementKind::B27 ? 5 : 1;
    out.facets.push_back({e, top, BoundaryTag::patch_outer(plane.axis)});
    const int first_side = kind == ElementKind::B27 ? 0 : 2, last_side = kind == ElementKind::B27 ? 3 : 4;
    for (int f = first_side; f <= last_side; ++f) {
      auto key = face_key(out, e, f);
      if (key.size() >= 3) sides[key].push_back({e, f});
    }
  }
  std::map<int, std::vector<int>> inherited_plane_by_axis;
  for (const auto& [key, refs] : sides) {
    if (refs.size() != 1) continue;
    std::vector<int> edge;
    for (int n : key)
      if (n < int(mesh.nodes.size())) edge.push_back(n);
    if (edge.size() != 2) throw MeshError("patch rim face does not sit on a plane edge");
    std::optional<BoundaryTag> tag;
    for (int fi : node_to_facets[edge[0]]) {
      const auto k = face_key(mesh, mesh.facets[fi].element, mesh.facets[fi].face);
      if (std::binary_search(k.begin(), k.end(), edge[1])) {
        tag = mesh.facets[fi].tag;
        break;
      }
    }
    if (!tag) throw MeshError("patch rim edge has no adjacent boundary facet");
    out.facets.push_back({refs[0].element, refs[0].face, *tag});
    if (tag->kind == BoundaryKind::SymmetryPlane)
      for (int l : face_nodes(out.elements[refs[0].element].kind, refs[0].face))
        inherited_plane_by_axis[tag->axis].push_back(out.elements[refs[0].element].conn[l]);
  }

  std::vector<BoundaryFacet> kept;
  for (int i = 0; i < int(out.facets.size()); ++i)
    if (i >= int(mesh.facets.size()) || !selected_set.count(i)) kept.push_back(out.facets[i]);
  out.facets = std::move(kept);

  std::vector<int> volume = plane_nodes;
  for (const auto& [g, id] : mid) volume.push_back(id);
  add_nodes_to_set(out, "patch_volume", volume);
  out.node_sets["patch_outer_face"] = out.facet_nodes(BoundaryKind::SymPatchOuter);
  for (const auto& [axis, ids] : inherited_plane_by_axis) add_nodes_to_set(out, "symmetry_plane", ids);
  auto& patch = out.element_sets["patch"];
  for (int e = first_new; e < int(out.elements.size()); ++e) patch.push_back(e);
  return out;
}

MirroredPoint mirror_probe(const Vec3& x, int axis, double value) {
  if (axis < 0 || axis > 2) throw DomainError("mirror axis must be 0, 1 or 2");
  MirroredPoint m{x, Vec3::Ones()};
  m.x[axis] = 2.0 * value - x[axis];
  m.signs[axis] = -1.0;
  return m;
}

}  // namespace sympatch
