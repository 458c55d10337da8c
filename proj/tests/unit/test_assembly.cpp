#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "sympatch/assembly.hpp"
#include "sympatch/meshgen.hpp"

using namespace sympatch;

namespace {

// Unit cube element bent by a smooth map so that every term sees a non-affine Jacobian.
ElementGeometry curved_element(const Vec3& shift, double size = 1.0) {
  Mesh m = gen_cuboid(Vec3::Constant(size), {1, 1, 1});
  ElementGeometry g = m.geometry(0);
  for (auto& x : g.nodes) {
    const Vec3 y = x;
    x = y + 0.08 * size * Vec3(std::sin(2.0 * y.y()), y.z() * y.x(), std::cos(y.x() + y.y()) - 1.0) + shift;
  }
  return g;
}

// Per-dof data of the independent oracle: field vector, curl and divergence of one basis function.
struct Basis {
  CVec3 F, curl;
  cplx div;
};

// Builds the element matrix entry by entry from explicit vector calculus on each basis function.
Eigen::MatrixXcd oracle_element(const ElementGeometry& geom, const Material& mat, double k0, bool amplitude,
                                double alpha) {
  const int n = int(geom.nodes.size());
  const auto& rule = quadrature(geom.kind, 4);
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  const double nu = 1.0 / mat.mu_r();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const MappedPoint mp = map_physical(geom, rule.points[q]);
    const std::vector<double> N = shape_values(geom.kind, rule.points[q]);
    const double w = rule.weights[q] * mp.detJ;
    const double r = mp.x.norm();
    const cplx ik(0.0, k0);
    // trial factor f and test factor g with their gradients
    cplx f = 1.0, g = 1.0;
    CVec3 gf = CVec3::Zero(), gg = CVec3::Zero();
    if (amplitude) {
      f = std::exp(-ik * r) / r;
      g = r * std::exp(ik * r);
      const CVec3 rhat = (mp.x / r).cast<cplx>();
      gf = -f * (ik + 1.0 / r) * rhat;
      gg = g * (ik + 1.0 / r) * rhat;
    }
    auto make = [&](int i, int c, cplx s, const CVec3& gs) {
      const CVec3 grad = s * mp.grads[i].cast<cplx>() + N[i] * gs;  // grad(s N_i)
      Basis b;
      if (c < 3) {
        const CVec3 e = Vec3::Unit(c).cast<cplx>();
        b.F = s * N[i] * e;
        b.curl = CVec3(grad[1] * e[2] - grad[2] * e[1], grad[2] * e[0] - grad[0] * e[2],
                       grad[0] * e[1] - grad[1] * e[0]);  // Eigen's cross conjugates complex results
        b.div = grad[c];
      } else {
        b.F = grad;
        b.curl = CVec3::Zero();
        b.div = 0.0;
      }
      return b;
    };
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 4; ++c) {
        const Basis t = make(i, c, g, gg);
        for (int j = 0; j < n; ++j)
          for (int d = 0; d < 4; ++d) {
            const Basis s = make(j, d, f, gf);
            const cplx v = nu * (t.curl.transpose() * s.curl)(0) + alpha * nu * t.div * s.div -
                           k0 * k0 * mat.eps_r() * (t.F.transpose() * s.F)(0);
            K(4 * i + c, 4 * j + d) += w * v;
          }
      }
  }
  return K;
}

double rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("harmonic element kernels") {
  Mesh cube = gen_cuboid(Vec3::Ones(), {1, 1, 1});
  const ElementGeometry unit = cube.geometry(0);
  HarmonicParams p;
  const int n = 27;

  SUBCASE("constant fields") {
    p.k0 = 0.0;
    const auto K = element_harmonic(unit, Material(), p).K;
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4 * n);
      for (int i = 0; i < n; ++i) v[4 * i + c] = 1.0;
      CHECK((K * v).norm() <= 1e-12 * K.norm());
    }
    p.k0 = 1.3;
    const auto K2 = element_harmonic(unit, Material(2.0, 1.0), p).K;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4 * n);
    for (int i = 0; i < n; ++i) psi[4 * i + 3] = 1.0;
    CHECK((K2 * psi).norm() <= 1e-12 * K2.norm());
  }

  SUBCASE("conventional form matches the term-by-term oracle") {
    p.k0 = 1.7;
    p.quad_order = 4;
    p.alpha = 0.6;
    const auto g = curved_element(Vec3::Zero());
    const Material mat(2.5, 1.5);
    const auto K = element_harmonic(g, mat, p).K;
    CHECK(rel(K, oracle_element(g, mat, p.k0, false, p.alpha)) <= 1e-10);
    CHECK((K - K.transpose()).norm() <= 1e-12 * K.norm());
  }

  SUBCASE("amplitude form matches the term-by-term oracle") {
    p.k0 = 2.0;
    p.quad_order = 4;
    p.formulation = Formulation::Amplitude;
    const auto g = curved_element(Vec3(1.0, 0.5, 2.0));
    const auto K = element_harmonic(g, Material(), p).K;
    CHECK(rel(K, oracle_element(g, Material(), p.k0, true, 1.0)) <= 1e-10);
    CHECK_THROWS_AS(element_harmonic(unit, Material(), {1.0, Formulation::Amplitude, 1.0, 2}), DomainError);
  }

  SUBCASE("wedge elements") {
    Mesh shell = gen_spherical_shell(1.0, 2.0, {1, 2, 4}, Span::Full);
    int w = 0;
    while (shell.elements[w].kind != ElementKind::W18) ++w;
    const auto g = shell.geometry(w);
    p.k0 = 1.1;
    p.quad_order = 4;
    CHECK(rel(element_harmonic(g, Material(), p).K, oracle_element(g, Material(), p.k0, false, 1.0)) <= 1e-10);
  }
}

TEST_CASE("absorbing boundary block") {
  Mesh cube = gen_cuboid(Vec3::Ones(), {1, 1, 1});
  const ElementGeometry unit = cube.geometry(0);
  HarmonicParams p;
  p.k0 = 0.0;
  CHECK(element_abc(unit, 5, Material(), p).norm() == 0.0);

  p.k0 = 1.5;
  const auto B = element_abc(unit, 5, Material(), p);  // face z = 1, normal +z
  CHECK((B - B.transpose()).norm() <= 1e-12 * B.norm());
  // Quadratic 1D mass on [0, 1]: entries for nodes at 0, 1/2, 1.
  const double m1[3][3] = {{4 / 30.0, 2 / 30.0, -1 / 30.0}, {2 / 30.0, 16 / 30.0, 2 / 30.0},
                           {-1 / 30.0, 2 / 30.0, 4 / 30.0}};
  const auto& fn = face_nodes(ElementKind::B27, 5);
  const auto& ref = reference_element(ElementKind::B27);
  auto lin = [](double xi) { return int(std::lround(xi + 1.0)); };
  for (int a : fn)
    for (int b : fn) {
      const Vec3 xa = ref.node_local_coords[a], xb = ref.node_local_coords[b];
      const double mass = m1[lin(xa.x())][lin(xb.x())] * m1[lin(xa.y())][lin(xb.y())];
      CHECK(std::abs(B(4 * a, 4 * b) - cplx(0.0, 1.5 * mass)) <= 1e-13);
      CHECK(std::abs(B(4 * a + 1, 4 * b + 1) - cplx(0.0, 1.5 * mass)) <= 1e-13);
      CHECK(std::abs(B(4 * a + 2, 4 * b + 2)) <= 1e-13);  // normal component is not absorbed
    }
  // A constant tangential field sees ik times the face area.
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(108);
  for (int i = 0; i < 27; ++i) v[4 * i] = 1.0;
  CHECK(std::abs(v.dot(B * v) - cplx(0.0, 1.5)) <= 1e-13);
}

TEST_CASE("dielectric contrast source") {
  const auto wave = HarmonicWaveSpec::from_k0(2.0, 1.0, Vec3::UnitZ(), Vec3::UnitX(), PhysicalConstants::codata());
  const auto load = dielectric_contrast_load(wave);
  const auto g = curved_element(Vec3(0.1, 0.2, 0.3), 0.15);
  HarmonicParams p;
  p.k0 = 2.0;
  p.quad_order = 4;
  CHECK(element_harmonic(g, Material(), p, load).f.norm() == 0.0);
  CHECK_THROWS_AS(element_harmonic(g, Material(2.0, 2.0), p, load), DomainError);

  // The load against a high-order integration of k0^2 (eps - 1) E_inc . N_i e_x.
  const Material diel(1.5, 1.0);
  const auto f = element_harmonic(g, diel, p, load).f;
  std::vector<double> x5, w5;
  gauss_legendre(5, x5, w5);
  Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(108);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 5; ++c) {
        const Vec3 xi(x5[a], x5[b], x5[c]);
        const MappedPoint mp = map_physical(g, xi);
        const auto N = shape_values(ElementKind::B27, xi);
        const CVec3 J = 4.0 * 0.5 * plane_wave_field(wave, mp.x);
        const double w = w5[a] * w5[b] * w5[c] * mp.detJ;
        for (int i = 0; i < 27; ++i) {
          for (int d = 0; d < 3; ++d) ref[4 * i + d] += w * N[i] * J[d];
          ref[4 * i + 3] += w * (mp.grads[i].cast<cplx>().transpose() * J)(0);
        }
      }
  CHECK((f - ref).norm() <= 1e-9 * ref.norm());
}

TEST_CASE("transient element blocks") {
  Mesh cube = gen_cuboid(Vec3::Ones(), {1, 1, 1});
  TransientParams p;
  p.c = 1.0;
  const auto te = element_transient(cube.geometry(0), Material(), p);
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(108);
    for (int i = 0; i < 27; ++i) v[4 * i + c] = 1.0;
    CHECK(v.dot(te.M * v) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK((te.K * v).norm() <= 1e-12 * te.K.norm());
  }
  CHECK((te.M - te.M.transpose()).norm() <= 1e-12 * te.M.norm());
  CHECK((te.K - te.K.transpose()).norm() <= 1e-12 * te.K.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(te.M);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());

  // The real damping block is the harmonic one divided by ik c.
  HarmonicParams hp;
  hp.k0 = 2.0;
  const auto Ch = element_abc(cube.geometry(0), 1, Material(), hp);
  const auto Ct = element_transient_abc(cube.geometry(0), 1, Material(), p);
  CHECK((Ct.cast<cplx>() * cplx(0.0, 2.0) - Ch).norm() <= 1e-13 * Ch.norm());
}

namespace {

// Smooth divergence-free A and an arbitrary psi on the unit cube.
CVec3 exact_A(const Vec3& x) {
  return CVec3(std::sin(2 * x.y() + x.z()), std::cos(x.x() + x.z()), std::sin(x.x() + x.y()));
}
cplx exact_psi(const Vec3& x) { return std::sin(x.x() + 2 * x.y() - x.z()) * std::exp(0.5 * x.x()); }
CVec3 grad_psi(const Vec3& x) {
  const double s = std::sin(x.x() + 2 * x.y() - x.z()), c = std::cos(x.x() + 2 * x.y() - x.z());
  const double e = std::exp(0.5 * x.x());
  return CVec3(e * (c + 0.5 * s), 2 * e * c, -e * c);
}
CVec3 curlcurl_A(const Vec3& x) {
  return CVec3(5 * std::sin(2 * x.y() + x.z()), 2 * std::cos(x.x() + x.z()), 2 * std::sin(x.x() + x.y()));
}

struct ManufacturedResult {
  double err_A, err_psi;
};

ManufacturedResult manufactured(int divisions, double k0, double eps_r) {
  Mesh mesh = gen_cuboid(Vec3::Ones(), {divisions, divisions, divisions});
  ConstraintSpec spec(mesh.nodes.size());
  for (int node : mesh.facet_nodes(BoundaryKind::PEC)) {
    for (int c = 0; c < 3; ++c) spec.add(node, {false, Vec3::Unit(c), 0.0, false});
    spec.add(node, {true, Vec3::Zero(), 0.0, false});
  }
  const DofMap dofs = build_dof_map(mesh, spec);
  Vector<cplx> uc(dofs.constrained_count());
  for (int c = 0; c < dofs.constrained_count(); ++c) {
    const auto [node, local] = dofs.constrained_slot(c);
    uc[c] = local < 3 ? exact_A(mesh.nodes[node])[local] : exact_psi(mesh.nodes[node]);
  }
  HarmonicParams p;
  p.k0 = k0;
  HarmonicLoad load;
  load.field = [&](const Vec3& x, const Material& m) -> CVec3 {
    return curlcurl_A(x) / m.mu_r() - k0 * k0 * m.eps_r() * (exact_A(x) + grad_psi(x));
  };
  MaterialTable mats{{Material(eps_r, 1.0)}};
  const auto blocks = assemble_harmonic(mesh, dofs, mats, p, load, uc);
  const Vector<cplx> uf = solve(blocks.op.ff, blocks.rhs);
  const Vector<cplx> u = dofs.expand(uf, uc);

  double eA = 0, nA = 0, ep = 0, np = 0;
  const auto& rule = quadrature(ElementKind::B27, 4);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto g = mesh.geometry(int(e));
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const MappedPoint mp = map_physical(g, rule.points[q]);
      const auto N = shape_values(ElementKind::B27, rule.points[q]);
      CVec3 A = CVec3::Zero();
      cplx psi = 0.0;
      for (int i = 0; i < 27; ++i) {
        const int node = mesh.elements[e].conn[i];
        A += N[i] * u.segment<3>(4 * node);
        psi += N[i] * u[4 * node + 3];
      }
      const double w = rule.weights[q] * mp.detJ;
      eA += w * (A - exact_A(mp.x)).squaredNorm();
      nA += w * exact_A(mp.x).squaredNorm();
      ep += w * std::norm(psi - exact_psi(mp.x));
      np += w * std::norm(exact_psi(mp.x));
    }
  }
  return {std::sqrt(eA / nA), std::sqrt(ep / np)};
}

}  // namespace

TEST_CASE("manufactured solution convergence") {
  const auto r1 = manufactured(1, 1.0, 2.0);
  const auto r2 = manufactured(2, 1.0, 2.0);
  const auto r4 = manufactured(4, 1.0, 2.0);
  const double order_A = std::log2(r2.err_A / r4.err_A);
  const double order_psi = std::log2(r2.err_psi / r4.err_psi);
  MESSAGE("A errors " << r1.err_A << " " << r2.err_A << " " << r4.err_A << " order " << order_A);
  MESSAGE("psi errors " << r1.err_psi << " " << r2.err_psi << " " << r4.err_psi << " order " << order_psi);
  CHECK(r2.err_A < r1.err_A);
  CHECK(order_A >= 2.8);
  CHECK(order_psi >= 2.8);
}

TEST_CASE("global assembly") {
  Mesh cube = gen_cuboid(Vec3::Ones(), {1, 1, 1});
  HarmonicParams p;
  p.k0 = 1.2;

  SUBCASE("one element without constraints") {
    const DofMap dofs = build_dof_map(cube, ConstraintSpec(cube.nodes.size()));
    const auto blocks = assemble_harmonic(cube, dofs, {}, p, {}, Vector<cplx>());
    const Eigen::MatrixXcd Ke = element_harmonic(cube.geometry(0), Material(), p).K;
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(108, 108);
    const auto& conn = cube.elements[0].conn;
    const Eigen::MatrixXcd dense(blocks.op.ff);
    for (int i = 0; i < 27; ++i)
      for (int j = 0; j < 27; ++j)
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            G(4 * i + a, 4 * j + b) = dense(dofs.slot(conn[i], a), dofs.slot(conn[j], b));
    CHECK((G - Ke).norm() <= 1e-14 * Ke.norm());
  }

  SUBCASE("all-Dirichlet mesh") {
    ConstraintSpec spec(cube.nodes.size());
    for (int n = 0; n < 27; ++n) {
      for (int c = 0; c < 3; ++c) spec.add(n, {false, Vec3::Unit(c), 1.0, false});
      spec.add(n, {true, Vec3::Zero(), 0.0, false});
    }
    const DofMap dofs = build_dof_map(cube, spec);
    const auto uc = dofs.constrained_values<cplx>(cube);
    const auto blocks = assemble_harmonic(cube, dofs, {}, p, {}, uc);
    CHECK(blocks.op.ff.rows() == 0);
    CHECK(blocks.rhs.size() == 0);
    CHECK_THROWS_AS(assemble_harmonic(cube, dofs, {}, p, {}, Vector<cplx>(3)), DomainError);
  }

  SUBCASE("node renumbering") {
    Mesh a = gen_cuboid(Vec3(1.0, 2.0, 1.5), {2, 2, 1});
    std::vector<int> perm(a.nodes.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
    Mesh b = a;
    for (std::size_t i = 0; i < perm.size(); ++i) b.nodes[perm[i]] = a.nodes[i];
    for (auto& el : b.elements)
      for (auto& nd : el.conn) nd = perm[nd];
    for (auto& [name, set] : b.node_sets)
      for (auto& nd : set) nd = perm[nd];
    const auto wave = HarmonicWaveSpec::from_k0(1.2, 1.0, Vec3::UnitZ(), Vec3::UnitX(), PhysicalConstants::codata());
    auto run = [&](const Mesh& m) {
      const DofMap dofs = build_dof_map(m, apply_pec(ConstraintSpec(m.nodes.size()), m, BoundaryKind::PEC, true));
      const auto uc = dofs.constrained_values<cplx>(m, [&](const Vec3& x) { return plane_wave_field(wave, x); });
      MaterialTable mats{{Material(1.5, 1.0)}};
      const auto blocks = assemble_harmonic(m, dofs, mats, p, dielectric_contrast_load(wave), uc);
      return Vector<cplx>(dofs.expand(Vector<cplx>(solve(blocks.op.ff, blocks.rhs)), uc));
    };
    const Vector<cplx> ua = run(a), ub = run(b);
    double diff = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      diff = std::max(diff, (ua.segment<4>(4 * i) - ub.segment<4>(4 * perm[i])).norm());
    CHECK(diff <= 1e-12 * ua.norm());
  }
}
