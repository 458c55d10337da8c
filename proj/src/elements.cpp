#include "sympatch/elements.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "sympatch/errors.hpp"

namespace sympatch {

namespace {

// 1D quadratic Lagrange basis on nodes {-1, 0, 1}.
inline void lagrange1d(double x, double v[3], double d[3]) {
  v[0] = 0.5 * x * (x - 1.0);
  v[1] = 1.0 - x * x;
  v[2] = 0.5 * x * (x + 1.0);
  d[0] = x - 0.5;
  d[1] = -2.0 * x;
  d[2] = x + 0.5;
}

struct HexTable {
  std::array<std::array<int, 3>, 27> tensor;  // per node: 1D indices along xi, eta, zeta
  std::vector<Vec3> coords;
};

const HexTable& hex_table() {
  static const HexTable table = [] {
    std::vector<std::array<int, 3>> all;
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) all.push_back({a, b, c});
    auto zeros = [](const std::array<int, 3>& t) {
      return int(t[0] == 1) + int(t[1] == 1) + int(t[2] == 1);
    };
    // Vertices, edge midpoints, face centres, body centre; lexicographic (zeta, eta, xi) within a group.
    std::stable_sort(all.begin(), all.end(),
                     [&](const auto& p, const auto& q) { return zeros(p) < zeros(q); });
    HexTable t{};
    for (int i = 0; i < 27; ++i) {
      t.tensor[i] = all[i];
      t.coords.emplace_back(all[i][0] - 1.0, all[i][1] - 1.0, all[i][2] - 1.0);
    }
    return t;
  }();
  return table;
}

// Quadratic triangle nodes: v0 (0,0), v1 (1,0), v2 (0,1), m01, m12, m20.
constexpr std::array<std::array<double, 2>, 6> kTriNodes = {
    {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}}};

// Wedge node -> (triangle node, line node) where line node 0: zeta=-1, 1: zeta=0, 2: zeta=+1.
constexpr std::array<std::array<int, 2>, 18> kWedgeNodes = {{{0, 0}, {1, 0}, {2, 0}, {0, 2}, {1, 2}, {2, 2},
                                                            {3, 0}, {4, 0}, {5, 0}, {3, 2}, {4, 2}, {5, 2},
                                                            {0, 1}, {1, 1}, {2, 1},
                                                            {3, 1}, {4, 1}, {5, 1}}};

inline void triangle_p2(double xi, double eta, double v[6], double dxi[6], double deta[6]) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  v[0] = l0 * (2.0 * l0 - 1.0);
  v[1] = l1 * (2.0 * l1 - 1.0);
  v[2] = l2 * (2.0 * l2 - 1.0);
  v[3] = 4.0 * l0 * l1;
  v[4] = 4.0 * l1 * l2;
  v[5] = 4.0 * l2 * l0;
  dxi[0] = -(4.0 * l0 - 1.0);
  deta[0] = -(4.0 * l0 - 1.0);
  dxi[1] = 4.0 * l1 - 1.0;
  deta[1] = 0.0;
  dxi[2] = 0.0;
  deta[2] = 4.0 * l2 - 1.0;
  dxi[3] = 4.0 * (l0 - l1);
  deta[3] = -4.0 * l1;
  dxi[4] = 4.0 * l2;
  deta[4] = 4.0 * l1;
  dxi[5] = -4.0 * l2;
  deta[5] = 4.0 * (l0 - l2);
}

ReferenceElement make_reference(ElementKind kind) {
  ReferenceElement r{kind, node_count(kind), {}, 0.0};
  if (kind == ElementKind::B27) {
    r.node_local_coords = hex_table().coords;
    r.volume = 8.0;
  } else {
    for (const auto& [tri, line] : kWedgeNodes)
      r.node_local_coords.emplace_back(kTriNodes[tri][0], kTriNodes[tri][1], double(line) - 1.0);
    r.volume = 1.0;
  }
  return r;
}

struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;  // sum to 1/2
};

TriangleRule triangle_rule(int order) {
  TriangleRule r;
  auto add3 = [&](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({a, a});
    r.points.push_back({b, a});
    r.points.push_back({a, b});
    for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
  };
  switch (order) {
    case 2:  // degree 2
      add3(1.0 / 6.0, 1.0 / 3.0);
      break;
    case 3:  // degree 4
      add3(0.445948490915965, 0.223381589678011);
      add3(0.091576213509771, 0.109951743655322);
      break;
    case 4:  // degree 5
      r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(0.5 * 0.225);
      add3(0.470142064105115, 0.132394152788506);
      add3(0.101286507323456, 0.125939180544827);
      break;
    default:
      throw DomainError("unsupported triangle quadrature order " + std::to_string(order));
  }
  return r;
}

QuadratureRule make_rule(ElementKind kind, int order) {
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  QuadratureRule q;
  if (kind == ElementKind::B27) {
    for (int k = 0; k < order; ++k)
      for (int j = 0; j < order; ++j)
        for (int i = 0; i < order; ++i) {
          q.points.emplace_back(gx[i], gx[j], gx[k]);
          q.weights.push_back(gw[i] * gw[j] * gw[k]);
        }
  } else {
    const TriangleRule tri = triangle_rule(order);
    for (int k = 0; k < order; ++k)
      for (std::size_t t = 0; t < tri.points.size(); ++t) {
        q.points.emplace_back(tri.points[t][0], tri.points[t][1], gx[k]);
        q.weights.push_back(tri.weights[t] * gw[k]);
      }
  }
  return q;
}

struct FaceDef {
  bool triangle;
  std::vector<int> nodes;
  std::vector<int> corners;
  Vec3 origin;  // reference point at (s, t) = (0, 0)
  Vec3 ds, dt;  // reference tangents
  Vec3 normal;
};

std::vector<FaceDef> make_faces(ElementKind kind) {
  std::vector<FaceDef> faces;
  const auto& ref = reference_element(kind);
  auto collect = [&](auto pred) {
    std::vector<int> ids;
    for (int i = 0; i < ref.node_count; ++i)
      if (pred(ref.node_local_coords[i])) ids.push_back(i);
    return ids;
  };
  auto corners_of = [&](const std::vector<int>& ids) {
    const int nv = kind == ElementKind::B27 ? 8 : 6;
    std::vector<int> c;
    for (int i : ids)
      if (i < nv) c.push_back(i);
    return c;
  };
  if (kind == ElementKind::B27) {
    for (int f = 0; f < 6; ++f) {
      const int a = f / 2;
      const double v = f % 2 == 0 ? -1.0 : 1.0;
      int b = (a + 1) % 3, c = (a + 2) % 3;
      if (b > c) std::swap(b, c);
      FaceDef fd;
      fd.triangle = false;
      fd.nodes = collect([&](const Vec3& p) { return p[a] == v; });
      fd.corners = corners_of(fd.nodes);
      fd.origin = Vec3::Zero();
      fd.origin[a] = v;
      fd.ds = Vec3::Unit(b);
      fd.dt = Vec3::Unit(c);
      fd.normal = v * Vec3::Unit(a);
      faces.push_back(fd);
    }
  } else {
    FaceDef f0{true, collect([](const Vec3& p) { return p.z() == -1.0; }), {}, Vec3(0, 0, -1),
               Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitZ()};
    FaceDef f1{true, collect([](const Vec3& p) { return p.z() == 1.0; }), {}, Vec3(0, 0, 1),
               Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    FaceDef f2{false, collect([](const Vec3& p) { return p.y() == 0.0; }), {}, Vec3(0.5, 0, 0),
               Vec3(0.5, 0, 0), Vec3::UnitZ(), -Vec3::UnitY()};
    FaceDef f3{false, collect([](const Vec3& p) { return p.x() + p.y() == 1.0; }), {}, Vec3(0.5, 0.5, 0),
               Vec3(-0.5, 0.5, 0), Vec3::UnitZ(), Vec3(1, 1, 0).normalized()};
    FaceDef f4{false, collect([](const Vec3& p) { return p.x() == 0.0; }), {}, Vec3(0, 0.5, 0),
               Vec3(0, 0.5, 0), Vec3::UnitZ(), -Vec3::UnitX()};
    for (auto* f : {&f0, &f1, &f2, &f3, &f4}) {
      f->corners = corners_of(f->nodes);
      faces.push_back(*f);
    }
  }
  return faces;
}

const FaceDef& face_def(ElementKind kind, int face) {
  static const std::vector<FaceDef> hex = make_faces(ElementKind::B27);
  static const std::vector<FaceDef> wedge = make_faces(ElementKind::W18);
  const auto& v = kind == ElementKind::B27 ? hex : wedge;
  if (face < 0 || face >= int(v.size())) throw DomainError("invalid local face " + std::to_string(face));
  return v[face];
}

}  // namespace

std::string_view to_string(ElementKind k) { return k == ElementKind::B27 ? "B27" : "W18"; }

ElementKind element_kind_from_string(std::string_view s) {
  if (s == "B27") return ElementKind::B27;
  if (s == "W18") return ElementKind::W18;
  throw FormatError("unknown element kind '" + std::string(s) + "'");
}

const ReferenceElement& reference_element(ElementKind kind) {
  static const ReferenceElement hex = make_reference(ElementKind::B27);
  static const ReferenceElement wedge = make_reference(ElementKind::W18);
  return kind == ElementKind::B27 ? hex : wedge;
}

bool inside_reference(ElementKind kind, const Vec3& xi, double tol) {
  if (kind == ElementKind::B27) return xi.cwiseAbs().maxCoeff() <= 1.0 + tol;
  return xi.x() >= -tol && xi.y() >= -tol && xi.x() + xi.y() <= 1.0 + tol && std::abs(xi.z()) <= 1.0 + tol;
}

void shape_values(ElementKind kind, const Vec3& xi, std::span<double> out) {
  if (kind == ElementKind::B27) {
    double v[3][3], d[3][3];
    for (int a = 0; a < 3; ++a) lagrange1d(xi[a], v[a], d[a]);
    const auto& t = hex_table().tensor;
    for (int i = 0; i < 27; ++i) out[i] = v[0][t[i][0]] * v[1][t[i][1]] * v[2][t[i][2]];
  } else {
    double tv[6], tdx[6], tdy[6], lv[3], ld[3];
    triangle_p2(xi.x(), xi.y(), tv, tdx, tdy);
    lagrange1d(xi.z(), lv, ld);
    for (int i = 0; i < 18; ++i) out[i] = tv[kWedgeNodes[i][0]] * lv[kWedgeNodes[i][1]];
  }
}

void shape_gradients(ElementKind kind, const Vec3& xi, std::span<Vec3> out) {
  if (kind == ElementKind::B27) {
    double v[3][3], d[3][3];
    for (int a = 0; a < 3; ++a) lagrange1d(xi[a], v[a], d[a]);
    const auto& t = hex_table().tensor;
    for (int i = 0; i < 27; ++i) {
      const auto& [a, b, c] = t[i];
      out[i] = Vec3(d[0][a] * v[1][b] * v[2][c], v[0][a] * d[1][b] * v[2][c], v[0][a] * v[1][b] * d[2][c]);
    }
  } else {
    double tv[6], tdx[6], tdy[6], lv[3], ld[3];
    triangle_p2(xi.x(), xi.y(), tv, tdx, tdy);
    lagrange1d(xi.z(), lv, ld);
    for (int i = 0; i < 18; ++i) {
      const auto [tri, line] = kWedgeNodes[i];
      out[i] = Vec3(tdx[tri] * lv[line], tdy[tri] * lv[line], tv[tri] * ld[line]);
    }
  }
}

std::vector<double> shape_values(ElementKind kind, const Vec3& xi) {
  std::vector<double> v(node_count(kind));
  shape_values(kind, xi, v);
  return v;
}

std::vector<Vec3> shape_gradients(ElementKind kind, const Vec3& xi) {
  std::vector<Vec3> g(node_count(kind));
  shape_gradients(kind, xi, g);
  return g;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1 || n > 6) throw DomainError("Gauss-Legendre rule supports 1..6 points");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[n - 1 - i] = z;
    w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

const QuadratureRule& quadrature(ElementKind kind, int order) {
  if (order < 2 || order > 4) throw DomainError("unsupported quadrature order " + std::to_string(order));
  static const std::array<QuadratureRule, 3> hex = {make_rule(ElementKind::B27, 2), make_rule(ElementKind::B27, 3),
                                                    make_rule(ElementKind::B27, 4)};
  static const std::array<QuadratureRule, 3> wedge = {make_rule(ElementKind::W18, 2),
                                                      make_rule(ElementKind::W18, 3),
                                                      make_rule(ElementKind::W18, 4)};
  return kind == ElementKind::B27 ? hex[order - 2] : wedge[order - 2];
}

const Tabulation& tabulate(ElementKind kind, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, Tabulation> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(int(kind), order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const QuadratureRule& rule = quadrature(kind, order);
  Tabulation t{&rule, node_count(kind), {}, {}};
  const int n = t.nodes;
  t.values.resize(rule.points.size() * n);
  t.ref_grads.resize(rule.points.size() * n);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    shape_values(kind, rule.points[q], std::span(t.values).subspan(q * n, n));
    shape_gradients(kind, rule.points[q], std::span(t.ref_grads).subspan(q * n, n));
  }
  return cache.emplace(key, std::move(t)).first->second;
}

void map_physical(const ElementGeometry& geom, std::span<const double> values, std::span<const Vec3> ref_grads,
                  Vec3& x, Mat3& J, double& detJ, std::span<Vec3> grads) {
  const int n = int(geom.nodes.size());
  x.setZero();
  J.setZero();
  for (int i = 0; i < n; ++i) {
    x += values[i] * geom.nodes[i];
    J += geom.nodes[i] * ref_grads[i].transpose();
  }
  detJ = J.determinant();
  if (!(detJ > 0.0)) throw DegenerateElementError(geom.id, "non-positive Jacobian determinant");
  const Mat3 JinvT = J.inverse().transpose();
  for (int i = 0; i < n; ++i) grads[i] = JinvT * ref_grads[i];
}

MappedPoint map_physical(const ElementGeometry& geom, const Vec3& xi) {
  const int n = node_count(geom.kind);
  if (int(geom.nodes.size()) != n) throw DomainError("element geometry has wrong node count");
  std::vector<double> v(n);
  std::vector<Vec3> g(n);
  shape_values(geom.kind, xi, v);
  shape_gradients(geom.kind, xi, g);
  MappedPoint mp;
  mp.grads.resize(n);
  map_physical(geom, v, g, mp.x, mp.J, mp.detJ, mp.grads);
  return mp;
}

bool face_is_triangle(ElementKind kind, int face) { return face_def(kind, face).triangle; }
const std::vector<int>& face_nodes(ElementKind kind, int face) { return face_def(kind, face).nodes; }
const std::vector<int>& face_corners(ElementKind kind, int face) { return face_def(kind, face).corners; }

Vec3 face_to_reference(ElementKind kind, int face, double s, double t) {
  const FaceDef& f = face_def(kind, face);
  if (f.triangle) return f.origin + s * f.ds + t * f.dt;
  return f.origin + s * f.ds + t * f.dt;
}

std::pair<Vec3, Vec3> face_tangents(ElementKind kind, int face) {
  const FaceDef& f = face_def(kind, face);
  return {f.ds, f.dt};
}

Vec3 face_reference_normal(ElementKind kind, int face) { return face_def(kind, face).normal; }

const FaceQuadrature& face_quadrature(ElementKind kind, int face, int order) {
  if (order < 2 || order > 4) throw DomainError("unsupported face quadrature order " + std::to_string(order));
  static const auto quads = [] {
    std::array<FaceQuadrature, 3> r;
    for (int o = 2; o <= 4; ++o) {
      std::vector<double> gx, gw;
      gauss_legendre(o, gx, gw);
      for (int j = 0; j < o; ++j)
        for (int i = 0; i < o; ++i) {
          r[o - 2].points.push_back({gx[i], gx[j]});
          r[o - 2].weights.push_back(gw[i] * gw[j]);
        }
    }
    return r;
  }();
  static const auto tris = [] {
    std::array<FaceQuadrature, 3> r;
    for (int o = 2; o <= 4; ++o) {
      const TriangleRule t = triangle_rule(o);
      r[o - 2].points = t.points;
      r[o - 2].weights = t.weights;
    }
    return r;
  }();
  return face_is_triangle(kind, face) ? tris[order - 2] : quads[order - 2];
}

FacePoint map_face(const ElementGeometry& geom, int face, double s, double t) {
  const Vec3 xi = face_to_reference(geom.kind, face, s, t);
  FacePoint fp;
  fp.vol = map_physical(geom, xi);
  fp.x = fp.vol.x;
  const auto [ds, dt] = face_tangents(geom.kind, face);
  Vec3 area = (fp.vol.J * ds).cross(fp.vol.J * dt);
  const Vec3 cof = fp.vol.J.inverse().transpose() * face_reference_normal(geom.kind, face);
  if (area.dot(cof) < 0.0) area = -area;
  fp.dA = area.norm();
  fp.normal = area / fp.dA;
  return fp;
}

}  // namespace sympatch
