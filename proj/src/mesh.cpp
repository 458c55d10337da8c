#include "sympatch/mesh.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sympatch/errors.hpp"

namespace sympatch {

namespace {
constexpr const char* kAxisNames = "XYZ";
}

std::string to_string(const BoundaryTag& tag) {
  switch (tag.kind) {
    case BoundaryKind::PEC:
      return "PEC";
    case BoundaryKind::ABC:
      return "ABC";
    case BoundaryKind::DielectricInterface:
      return "DIELECTRIC_INTERFACE";
    case BoundaryKind::SymPatchOuter:
      return std::string("SYM_PATCH_OUTER_") + kAxisNames[tag.axis];
    case BoundaryKind::SymmetryPlane:
      return std::string("SYMMETRY_PLANE_") + kAxisNames[tag.axis];
  }
  return "?";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
  if (s == "PEC") return BoundaryTag::pec();
  if (s == "ABC") return BoundaryTag::abc();
  if (s == "DIELECTRIC_INTERFACE") return BoundaryTag::interface();
  auto axis_of = [&](std::size_t prefix) {
    if (s.size() != prefix + 1) throw FormatError("bad boundary tag '" + s + "'");
    const char c = s.back();
    if (c < 'X' || c > 'Z') throw FormatError("bad boundary tag axis in '" + s + "'");
    return c - 'X';
  };
  if (s.rfind("SYM_PATCH_OUTER_", 0) == 0) return BoundaryTag::patch_outer(axis_of(16));
  if (s.rfind("SYMMETRY_PLANE_", 0) == 0) return BoundaryTag::symmetry_plane(axis_of(15));
  throw FormatError("unknown boundary tag '" + s + "'");
}

ElementGeometry Mesh::geometry(int e) const {
  const Element& el = elements.at(e);
  ElementGeometry g{el.kind, {}, e};
  g.nodes.reserve(el.conn.size());
  for (int n : el.conn) g.nodes.push_back(nodes[n]);
  return g;
}

double Mesh::diameter() const {
  if (nodes.empty()) return 0.0;
  Vec3 lo = nodes[0], hi = nodes[0];
  for (const auto& x : nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return (hi - lo).norm();
}

int Mesh::count(ElementKind kind) const {
  return int(std::count_if(elements.begin(), elements.end(), [&](const Element& e) { return e.kind == kind; }));
}

bool Mesh::has_tag(BoundaryKind kind) const {
  return std::any_of(facets.begin(), facets.end(), [&](const BoundaryFacet& f) { return f.tag.kind == kind; });
}

std::vector<int> Mesh::facet_nodes(BoundaryKind kind) const {
  std::vector<int> ids;
  for (const auto& f : facets) {
    if (f.tag.kind != kind) continue;
    for (int l : face_nodes(elements[f.element].kind, f.face)) ids.push_back(elements[f.element].conn[l]);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<bool> Mesh::patch_mask() const {
  std::vector<bool> mask(elements.size(), false);
  if (auto it = element_sets.find("patch"); it != element_sets.end())
    for (int e : it->second) mask[e] = true;
  return mask;
}

std::vector<int> face_key(const Mesh& mesh, int element, int face) {
  const Element& el = mesh.elements[element];
  std::vector<int> key;
  for (int l : face_corners(el.kind, face)) key.push_back(el.conn[l]);
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  return key;
}

namespace {

std::map<std::vector<int>, std::vector<FaceRef>> face_table(const Mesh& mesh) {
  std::map<std::vector<int>, std::vector<FaceRef>> table;
  for (int e = 0; e < int(mesh.elements.size()); ++e)
    for (int f = 0; f < face_count(mesh.elements[e].kind); ++f) {
      auto key = face_key(mesh, e, f);
      if (key.size() < 3) continue;
      table[std::move(key)].push_back({e, f});
    }
  return table;
}

}  // namespace

std::vector<FaceRef> boundary_faces(const Mesh& mesh) {
  std::vector<FaceRef> out;
  for (const auto& [key, refs] : face_table(mesh))
    if (refs.size() == 1) out.push_back(refs[0]);
  std::sort(out.begin(), out.end(),
            [](const FaceRef& a, const FaceRef& b) { return std::tie(a.element, a.face) < std::tie(b.element, b.face); });
  return out;
}

MeshValidation validate_mesh(const Mesh& mesh) {
  MeshValidation v;
  auto problem = [&](std::string s) {
    v.ok = false;
    if (v.problems.size() < 50) v.problems.push_back(std::move(s));
  };
  if (mesh.elements.empty()) problem("mesh has no elements");

  const int nn = int(mesh.nodes.size());
  bool conn_ok = true;
  for (int e = 0; e < int(mesh.elements.size()); ++e) {
    const Element& el = mesh.elements[e];
    if (int(el.conn.size()) != node_count(el.kind)) {
      problem("element " + std::to_string(e) + " has wrong node count");
      conn_ok = false;
      continue;
    }
    for (int n : el.conn)
      if (n < 0 || n >= nn) {
        problem("element " + std::to_string(e) + " references invalid node " + std::to_string(n));
        conn_ok = false;
      }
  }
  if (!conn_ok) return v;

  v.min_detJ = std::numeric_limits<double>::infinity();
  for (int e = 0; e < int(mesh.elements.size()); ++e) {
    const ElementGeometry g = mesh.geometry(e);
    const Tabulation& tab = tabulate(g.kind, 3);
    std::vector<Vec3> grads(tab.nodes);
    for (std::size_t q = 0; q < tab.rule->points.size(); ++q) {
      Vec3 x;
      Mat3 J;
      double det = 0.0;
      try {
        map_physical(g, std::span(tab.values).subspan(q * tab.nodes, tab.nodes),
                     std::span(tab.ref_grads).subspan(q * tab.nodes, tab.nodes), x, J, det, grads);
      } catch (const DegenerateElementError&) {
        det = J.determinant();
        problem("element " + std::to_string(e) + " has non-positive Jacobian");
      }
      v.min_detJ = std::min(v.min_detJ, det);
    }
  }

  const auto table = face_table(mesh);
  std::map<std::pair<int, int>, const std::vector<int>*> owner;
  for (const auto& [key, refs] : table) {
    if (refs.size() > 2) problem("face shared by more than two elements");
    if (refs.size() == 1) ++v.boundary_faces;
    if (refs.size() == 2) ++v.interior_faces;
    for (const auto& r : refs) owner[{r.element, r.face}] = &key;
  }
  std::map<std::vector<int>, int> tagged;
  for (const auto& f : mesh.facets) {
    if (f.element < 0 || f.element >= int(mesh.elements.size()) || f.face < 0 ||
        f.face >= face_count(mesh.elements[f.element].kind)) {
      problem("facet references an invalid element face");
      continue;
    }
    auto it = owner.find({f.element, f.face});
    if (it == owner.end()) {
      problem("tagged facet is collapsed");
      continue;
    }
    const bool interior = table.at(*it->second).size() == 2;
    if (interior && f.tag.kind != BoundaryKind::DielectricInterface)
      problem("interior face tagged " + to_string(f.tag));
    if (!interior) ++tagged[*it->second];
  }
  for (const auto& [key, refs] : table) {
    if (refs.size() != 1) continue;
    auto it = tagged.find(key);
    if (it == tagged.end()) {
      problem("untagged boundary face on element " + std::to_string(refs[0].element));
    } else if (it->second > 1) {
      problem("boundary face tagged more than once on element " + std::to_string(refs[0].element));
    }
  }

  // Duplicate nodes: sweep along x.
  const double tol = 1e-9 * mesh.diameter();
  std::vector<int> order(nn);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return mesh.nodes[a].x() < mesh.nodes[b].x(); });
  for (int i = 0; i < nn; ++i)
    for (int j = i + 1; j < nn && mesh.nodes[order[j]].x() - mesh.nodes[order[i]].x() <= tol; ++j)
      if ((mesh.nodes[order[j]] - mesh.nodes[order[i]]).norm() <= tol)
        problem("duplicate nodes " + std::to_string(order[i]) + " and " + std::to_string(order[j]));

  for (const auto& [name, ids] : mesh.node_sets)
    for (int n : ids)
      if (n < 0 || n >= nn) problem("node set " + name + " has invalid member");
  return v;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "sympatch-mesh 1\n" << std::setprecision(17);
  out << "nodes " << mesh.nodes.size() << "\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    out << i << ' ' << mesh.nodes[i].x() << ' ' << mesh.nodes[i].y() << ' ' << mesh.nodes[i].z() << "\n";
  out << "elements " << mesh.elements.size() << "\n";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    out << e << ' ' << to_string(el.kind) << ' ' << el.region;
    for (int n : el.conn) out << ' ' << n;
    out << "\n";
  }
  out << "facets " << mesh.facets.size() << "\n";
  for (const auto& f : mesh.facets) out << f.element << ' ' << f.face << ' ' << to_string(f.tag) << "\n";
  auto write_sets = [&](const char* header, const std::map<std::string, std::vector<int>>& sets) {
    out << header << ' ' << sets.size() << "\n";
    for (const auto& [name, ids] : sets) {
      out << name << ' ' << ids.size();
      for (int i : ids) out << ' ' << i;
      out << "\n";
    }
  };
  write_sets("node_sets", mesh.node_sets);
  write_sets("element_sets", mesh.element_sets);
}

Mesh read_mesh(std::istream& in) {
  int line_no = 0;
  auto next_line = [&](std::istringstream& ls) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ls.clear();
      ls.str(line);
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) {
    throw FormatError("mesh line " + std::to_string(line_no) + ": " + what);
  };
  auto header = [&](const char* name) {
    std::istringstream ls;
    if (!next_line(ls)) fail(std::string("missing '") + name + "' block");
    std::string word;
    long long count = -1;
    ls >> word >> count;
    if (word != name || count < 0) fail(std::string("expected '") + name + " <count>'");
    return std::size_t(count);
  };

  Mesh mesh;
  {
    std::istringstream ls;
    if (!next_line(ls)) throw FormatError("empty mesh file");
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != "sympatch-mesh" || version != 1) fail("not a sympatch mesh file");
  }
  const std::size_t nn = header("nodes");
  mesh.nodes.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    std::istringstream ls;
    if (!next_line(ls)) fail("truncated node block");
    std::size_t id;
    double x, y, z;
    if (!(ls >> id >> x >> y >> z) || id != i) fail("bad node record");
    mesh.nodes[i] = Vec3(x, y, z);
  }
  const std::size_t ne = header("elements");
  mesh.elements.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    std::istringstream ls;
    if (!next_line(ls)) fail("truncated element block");
    std::size_t id;
    std::string kind;
    Element& el = mesh.elements[e];
    if (!(ls >> id >> kind >> el.region) || id != e) fail("bad element record");
    try {
      el.kind = element_kind_from_string(kind);
    } catch (const FormatError& err) {
      fail(err.what());
    }
    el.conn.resize(node_count(el.kind));
    for (int& n : el.conn)
      if (!(ls >> n) || n < 0 || std::size_t(n) >= nn) fail("bad element connectivity");
  }
  const std::size_t nf = header("facets");
  mesh.facets.resize(nf);
  for (auto& f : mesh.facets) {
    std::istringstream ls;
    if (!next_line(ls)) fail("truncated facet block");
    std::string tag;
    if (!(ls >> f.element >> f.face >> tag)) fail("bad facet record");
    if (f.element < 0 || std::size_t(f.element) >= ne || f.face < 0 ||
        f.face >= face_count(mesh.elements[f.element].kind))
      fail("facet references invalid element face");
    try {
      f.tag = boundary_tag_from_string(tag);
    } catch (const FormatError& err) {
      fail(err.what());
    }
  }
  auto read_sets = [&](const char* name, std::map<std::string, std::vector<int>>& sets, std::size_t limit) {
    const std::size_t ns = header(name);
    for (std::size_t s = 0; s < ns; ++s) {
      std::istringstream ls;
      if (!next_line(ls)) fail("truncated set block");
      std::string set_name;
      std::size_t count;
      if (!(ls >> set_name >> count)) fail("bad set record");
      auto& ids = sets[set_name];
      ids.resize(count);
      for (int& i : ids)
        if (!(ls >> i) || i < 0 || std::size_t(i) >= limit) fail("bad set member");
    }
  };
  read_sets("node_sets", mesh.node_sets, nn);
  read_sets("element_sets", mesh.element_sets, ne);
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_mesh(mesh, out);
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

std::optional<Vec3> inverse_map(const ElementGeometry& geom, const Vec3& x) {
  const int n = node_count(geom.kind);
  Vec3 xi = geom.kind == ElementKind::B27 ? Vec3::Zero() : Vec3(1.0 / 3.0, 1.0 / 3.0, 0.0);
  std::vector<double> v(n);
  std::vector<Vec3> g(n);
  const double scale = (geom.nodes.front() - geom.nodes.back()).norm() + 1e-300;
  for (int it = 0; it < 60; ++it) {
    shape_values(geom.kind, xi, v);
    shape_gradients(geom.kind, xi, g);
    Vec3 xc = Vec3::Zero();
    Mat3 J = Mat3::Zero();
    for (int i = 0; i < n; ++i) {
      xc += v[i] * geom.nodes[i];
      J += geom.nodes[i] * g[i].transpose();
    }
    Eigen::FullPivLU<Mat3> lu(J);
    if (!lu.isInvertible()) return std::nullopt;
    Vec3 dxi = lu.solve(x - xc);
    // Damp wild steps; points far outside are rejected by the caller anyway.
    const double len = dxi.norm();
    if (len > 1.0) dxi *= 1.0 / len;
    xi += dxi;
    if (xi.norm() > 10.0) return std::nullopt;
    if (dxi.norm() < 1e-13 || (x - xc).norm() < 1e-14 * scale) return xi;
  }
  return std::nullopt;
}

PointLocator::PointLocator(const Mesh& mesh, std::vector<bool> skip) : mesh_(&mesh), skip_(std::move(skip)) {
  skip_.resize(mesh.elements.size(), false);
  lo_.resize(mesh.elements.size());
  hi_.resize(mesh.elements.size());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    Vec3 lo = mesh.nodes[mesh.elements[e].conn[0]], hi = lo;
    for (int n : mesh.elements[e].conn) {
      lo = lo.cwiseMin(mesh.nodes[n]);
      hi = hi.cwiseMax(mesh.nodes[n]);
    }
    const Vec3 pad = Vec3::Constant(0.1 * (hi - lo).maxCoeff() + 1e-12);
    lo_[e] = lo - pad;
    hi_[e] = hi + pad;
  }
}

std::optional<LocatedPoint> PointLocator::locate(const Vec3& x) const {
  std::optional<LocatedPoint> best;
  double best_excess = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < lo_.size(); ++e) {
    if (skip_[e]) continue;
    if ((x.array() < lo_[e].array()).any() || (x.array() > hi_[e].array()).any()) continue;
    const ElementGeometry g = mesh_->geometry(int(e));
    const auto xi = inverse_map(g, x);
    if (!xi) continue;
    if (inside_reference(g.kind, *xi, 1e-8)) return LocatedPoint{int(e), *xi};
    // Remember the nearest miss so points a hair outside curved faces still resolve.
    double excess;
    if (g.kind == ElementKind::B27) {
      excess = (xi->cwiseAbs().array() - 1.0).maxCoeff();
    } else {
      excess = std::max({-xi->x(), -xi->y(), xi->x() + xi->y() - 1.0, std::abs(xi->z()) - 1.0});
    }
    if (excess < best_excess) {
      best_excess = excess;
      best = LocatedPoint{int(e), *xi};
    }
  }
  if (best && best_excess < 1e-6) return best;
  return std::nullopt;
}

}  // namespace sympatch
