#include <doctest.h>

#include <cmath>

#include "sympatch/dofmap.hpp"
#include "sympatch/errors.hpp"
#include "sympatch/meshgen.hpp"

using namespace sympatch;
using std::numbers::pi;

namespace {

Mesh quarter_cavity() {
  auto q = gen_cuboid(Vec3(pi / 2, pi, pi / 2), {2, 4, 2});
  retag_plane(q, 0, pi / 2, BoundaryTag::symmetry_plane(0));
  retag_plane(q, 2, pi / 2, BoundaryTag::symmetry_plane(2));
  q = attach_thin_patch(q, {0, pi / 2}, 0.01);
  return attach_thin_patch(q, {2, pi / 2}, 0.01);
}

}  // namespace

TEST_CASE("unconstrained numbering") {
  const auto m = gen_cuboid(Vec3::Ones(), {1, 1, 1});
  const auto dm = build_dof_map(m, ConstraintSpec(m.nodes.size()));
  CHECK(dm.free_count() == 4 * 27);
  CHECK(dm.constrained_count() == 0);
  for (int n = 0; n < 27; ++n)
    for (int s = 0; s < 4; ++s) CHECK(dm.slot(n, s) == 4 * n + s);
}

TEST_CASE("cavity equation counts") {
  const auto full = gen_cuboid(Vec3::Constant(pi), {4, 4, 4});
  const auto df = build_dof_map(full, apply_pec(ConstraintSpec(full.nodes.size()), full));
  CHECK(df.free_count() == 1666);
  // Corner node: three orthogonal walls pin all of A.
  for (int s = 0; s < 4; ++s) CHECK(df.slot(0, s) < 0);
  CHECK(!df.rotated(0));

  const auto q = quarter_cavity();
  const auto spec = apply_symmetry_patch(apply_pec(ConstraintSpec(q.nodes.size()), q), q);
  const auto dq = build_dof_map(q, spec);
  CHECK(dq.free_count() == 891);
  const auto dq_inner = build_dof_map(q, apply_symmetry_patch(apply_pec(ConstraintSpec(q.nodes.size()), q), q, false));
  CHECK(dq_inner.free_count() > dq.free_count());
  // Deterministic numbering.
  const auto again = build_dof_map(q, spec);
  for (int n = 0; n < q.nodes.size(); ++n)
    for (int s = 0; s < 4; ++s) CHECK(again.slot(n, s) == dq.slot(n, s));
}

TEST_CASE("symmetry patch constraints") {
  auto h = attach_thin_patch(gen_spherical_shell(1.0, 3.0, {2, 4, 3}, Span::Half), {1, 0.0}, 0.01);
  const auto spec = apply_symmetry_patch(ConstraintSpec(h.nodes.size()), h);
  const auto dm = build_dof_map(h, spec);
  for (int n : h.node_sets.at("patch_outer_face")) {
    CHECK(dm.slot(n, 1) < 0);
    CHECK(dm.slot(n, 0) >= 0);
    CHECK(dm.slot(n, 3) < 0);
  }
  for (int n : h.node_sets.at("patch_volume")) CHECK(dm.slot(n, 3) < 0);
  for (int n : h.node_sets.at("symmetry_plane")) CHECK(dm.slot(n, 1) >= 0);

  auto bare = gen_spherical_shell(1.0, 3.0, {2, 4, 3}, Span::Half);
  CHECK_THROWS_AS(apply_symmetry_patch(ConstraintSpec(bare.nodes.size()), bare), MeshError);
  auto empty = h;
  empty.node_sets["patch_volume"].clear();
  CHECK_THROWS_AS(apply_symmetry_patch(ConstraintSpec(empty.nodes.size()), empty), MeshError);
}

TEST_CASE("pec lift on a sphere") {
  const auto m = gen_spherical_shell(1.0, 3.0, {1, 4, 8}, Span::Full);
  const auto spec = apply_pec(ConstraintSpec(m.nodes.size()), m, BoundaryKind::PEC, true);
  const auto dm = build_dof_map(m, spec);
  const double k0 = 1.0;
  std::function<Eigen::Vector3cd(const Vec3&)> einc = [&](const Vec3& x) {
    return Eigen::Vector3cd(std::exp(cplx(0, -k0 * x.z())), 0, 0);
  };
  const auto c = dm.constrained_values<cplx>(m, einc);
  const auto nodal = dm.expand<cplx>(Eigen::VectorXcd::Zero(dm.free_count()), c);
  for (int n : m.facet_nodes(BoundaryKind::PEC)) {
    const Vec3 nrm = m.nodes[n].normalized();
    const Eigen::Vector3cd A = nodal.segment<3>(4 * n);
    const Eigen::Vector3cd tang = A + einc(m.nodes[n]);
    const Eigen::Vector3cd tt = tang - nrm.cast<cplx>() * nrm.cast<cplx>().dot(tang);
    CHECK(tt.norm() <= 0.05);  // discrete normals on a coarse curved mesh
    CHECK(std::abs(nodal[4 * n + 3]) == 0.0);
  }
  const auto zero = dm.constrained_values<cplx>(m, [](const Vec3&) { return Eigen::Vector3cd::Zero().eval(); });
  CHECK(zero.norm() == 0.0);
}

TEST_CASE("pec lift on flat walls is exact") {
  const auto m = gen_cuboid(Vec3(1, 2, 1), {2, 2, 2});
  const auto dm = build_dof_map(m, apply_pec(ConstraintSpec(m.nodes.size()), m, BoundaryKind::PEC, true));
  std::function<Eigen::Vector3d(const Vec3&)> g = [](const Vec3& x) { return Vec3(1 + x.y(), x.z() - 2, 0.5 * x.x()); };
  const auto nodal = dm.expand<double>(Eigen::VectorXd::Zero(dm.free_count()), dm.constrained_values<double>(m, g));
  for (int n : m.facet_nodes(BoundaryKind::PEC)) {
    const Vec3& x = m.nodes[n];
    const Vec3 A = nodal.segment<3>(4 * n);
    for (int d = 0; d < 3; ++d) {
      const bool on_wall = std::abs(x[d]) < 1e-12 || std::abs(x[d] - (d == 1 ? 2.0 : 1.0)) < 1e-12;
      // Every component tangential to some wall through this node equals -g.
      for (int c = 0; c < 3; ++c)
        if (on_wall && c != d) CHECK(std::abs(A[c] + g(x)[c]) <= 1e-13);
    }
  }
}

TEST_CASE("constraint conflicts") {
  const auto m = gen_cuboid(Vec3::Ones(), {1, 1, 1});
  ConstraintSpec spec(m.nodes.size());
  spec.add(0, {false, Vec3::UnitX(), 1.0, false});
  spec.add(0, {false, Vec3::UnitX(), 2.0, false});
  CHECK_THROWS_AS(build_dof_map(m, spec), ConstraintConflictError);
  ConstraintSpec psi(m.nodes.size());
  psi.add(1, {true, Vec3::Zero(), 0.0, false});
  psi.add(1, {true, Vec3::Zero(), 1.0, false});
  CHECK_THROWS_AS(build_dof_map(m, psi), ConstraintConflictError);
  ConstraintSpec ok(m.nodes.size());
  ok.add(2, {false, Vec3(1, 1, 0).normalized(), 0.5, false});
  const auto dm = build_dof_map(m, ok);
  CHECK(dm.rotated(2));
  const auto nodal = dm.expand<double>(Eigen::VectorXd::Zero(dm.free_count()), dm.constrained_values<double>(m));
  CHECK(nodal.segment<3>(8).dot(Vec3(1, 1, 0).normalized()) == doctest::Approx(0.5));
}

TEST_CASE("all-Dirichlet mesh has no unknowns") {
  const auto m = gen_cuboid(Vec3::Ones(), {1, 1, 1});
  ConstraintSpec spec(m.nodes.size());
  for (int n = 0; n < 27; ++n) {
    for (int d = 0; d < 3; ++d) spec.add(n, {false, Vec3::Unit(d), 0.0, false});
    spec.add(n, {true, Vec3::Zero(), 0.0, false});
  }
  CHECK(build_dof_map(m, spec).free_count() == 0);
}
