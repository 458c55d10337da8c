#include <doctest.h>

#include <numbers>
#include <sstream>

#include "sympatch/harmonic.hpp"
#include "sympatch/oracles.hpp"

using namespace sympatch;
using std::numbers::pi;

namespace {

HarmonicProblem sphere_problem() {
  HarmonicProblem pb;
  pb.wave = HarmonicWaveSpec::from_k0(1.0, 1.0, Vec3::UnitZ(), Vec3::UnitX(), PhysicalConstants::codata());
  pb.params.k0 = 1.0;
  return pb;
}

std::shared_ptr<Mesh> coarse_shell(Span span) {
  return std::make_shared<Mesh>(gen_spherical_shell(1.0, 3.0, {2, 4, span == Span::Full ? 8 : 4}, span));
}

}  // namespace

TEST_CASE("scattered field cancels the incident tangential field on the conductor") {
  const auto sol = solve_harmonic(coarse_shell(Span::Full), sphere_problem());
  CHECK(sol.report.residual_norm_relative < 1e-8);
  const auto wave = sphere_problem().wave;
  int checked = 0;
  for (int n = 0; n < int(sol.mesh->nodes.size()); ++n) {
    const Vec3 x = sol.mesh->nodes[n];
    if (std::abs(x.norm() - 1.0) > 1e-9) continue;
    // Constrained frame directions are the discrete tangents; there the nodal A is exact.
    const CVec3 total = sol.nodal.segment<3>(4 * n) + plane_wave_field(wave, x);
    for (int s = 0; s < 3; ++s) {
      if (sol.dofs->slot(n, s) >= 0) continue;
      const CVec3 t = sol.dofs->frame(n).col(s).cast<cplx>();
      CHECK(std::abs(t.cwiseProduct(total).sum()) < 1e-12);
      ++checked;
    }
    CHECK(std::abs(sol.nodal[4 * n + 3]) == 0.0);
    // Away from the node the field is interpolated, so only approximately tangential-free.
    const Vec3 r = x.normalized();
    const CVec3 E = eval_E(sol, x) + plane_wave_field(wave, x);
    const CVec3 Et = E - r.cast<cplx>() * r.cast<cplx>().cwiseProduct(E).sum();
    CHECK(Et.norm() < 0.15);
  }
  CHECK(checked > 20);
}

TEST_CASE("no incident field means no scattered field") {
  HarmonicProblem pb = sphere_problem();
  pb.scattering = false;
  const auto sol = solve_harmonic(coarse_shell(Span::Full), pb);
  CHECK(sol.nodal.norm() == doctest::Approx(0.0));
}

TEST_CASE("probes beyond a symmetry plane see the mirrored field") {
  HarmonicProblem pb = sphere_problem();
  pb.symmetry_planes = {{1, 0.0}};
  const auto sol = solve_harmonic(
      std::make_shared<Mesh>(attach_thin_patch(gen_spherical_shell(1.0, 3.0, {2, 4, 4}, Span::Half), {1, 0.0}, 0.01)),
      pb);
  for (const Vec3& x : {Vec3(0.8, 1.1, 0.4), Vec3(-1.5, 0.7, -0.9), Vec3(0.2, 2.1, 1.3)}) {
    const CVec3 a = eval_E(sol, x);
    const CVec3 b = eval_E(sol, Vec3(x.x(), -x.y(), x.z()));
    CHECK((b - CVec3(a.x(), -a.y(), a.z())).norm() < 1e-12 * a.norm());
  }
  CHECK_THROWS_AS(eval_E(sol, Vec3(0.1, 0.1, 0.1)), DomainError);
  CHECK_THROWS_AS(eval_E(sol, Vec3(4.0, 0.0, 0.0)), DomainError);
}

TEST_CASE("half domain with patch and full domain both approach the series solution") {
  HarmonicProblem pb = sphere_problem();
  const auto full = solve_harmonic(std::make_shared<Mesh>(gen_spherical_shell(1.0, 3.0, {4, 4, 8}, Span::Full)), pb);
  pb.symmetry_planes = {{1, 0.0}};
  const auto half = solve_harmonic(
      std::make_shared<Mesh>(attach_thin_patch(gen_spherical_shell(1.0, 3.0, {4, 4, 4}, Span::Half), {1, 0.0}, 0.01)),
      pb);
  CHECK(half.free_count() < full.free_count());
  const SphericalSweep sweep{SphericalSweep::Variable::Phi, 1.5, pi / 4, 0.0, 2 * pi, 17};
  const auto lf = probe_line(full, sweep), lh = probe_line(half, sweep);
  double peak = 0, ef = 0, eh = 0;
  for (std::size_t i = 0; i < lf.fields.size(); ++i) {
    const CVec3 ref = mie_pec_sphere(1.0, 1.0, 1.0, to_spherical(sweep.point(lf.coords[i])));
    peak = std::max(peak, ref.norm());
    ef = std::max(ef, (lf.fields[i] - ref).norm());
    eh = std::max(eh, (lh.fields[i] - ref).norm());
  }
  CHECK(ef < 0.3 * peak);
  CHECK(eh < 0.3 * peak);
}

TEST_CASE("direct plane constraint reproduces the full-domain field, psi = 0 on the plane does not") {
  const auto full = solve_harmonic(coarse_shell(Span::Full), sphere_problem());
  HarmonicProblem half = sphere_problem();
  half.symmetry_planes = {{1, 0.0}};
  const auto direct = solve_harmonic(coarse_shell(Span::Half), half);
  const auto patched =
      solve_harmonic(std::make_shared<Mesh>(attach_thin_patch(*coarse_shell(Span::Half), {1, 0.0}, 0.01)), half);
  double peak = 0.0, d_direct = 0.0, d_patch = 0.0;
  for (double phi = 0.1; phi < 2 * pi; phi += 0.4) {
    const Vec3 x = to_cartesian({1.5, pi / 4, phi});
    const CVec3 ef = eval_E(full, x);
    peak = std::max(peak, ef.norm());
    d_direct = std::max(d_direct, (eval_E(direct, x) - ef).norm());
    d_patch = std::max(d_patch, (eval_E(patched, x) - ef).norm());
  }
  CHECK(d_direct < 1e-8 * peak);
  CHECK(d_patch > 1e-3 * peak);
}

TEST_CASE("amplitude formulation is limited to vacuum") {
  HarmonicProblem pb = sphere_problem();
  pb.params.formulation = Formulation::Amplitude;
  pb.materials.by_region = {Material(2.0, 1.0)};
  CHECK_THROWS_AS(solve_harmonic(coarse_shell(Span::Full), pb), ConfigError);
}

TEST_CASE("amplitude and conventional solutions converge together under radial refinement") {
  auto gap = [](int nr) {
    HarmonicProblem pb = sphere_problem();
    const auto mesh = std::make_shared<Mesh>(gen_spherical_shell(1.0, 5.0, {nr, 4, 8}, Span::Full));
    const auto conv = solve_harmonic(mesh, pb);
    pb.params.formulation = Formulation::Amplitude;
    const auto amp = solve_harmonic(mesh, pb);
    const SphericalSweep sweep{SphericalSweep::Variable::Theta, 3.3, 0.25, 0.3, 2.8, 9};
    double d = 0;
    for (double c : sweep.coords()) d = std::max(d, (eval_E(conv, sweep.point(c)) - eval_E(amp, sweep.point(c))).norm());
    return d;
  };
  const double coarse = gap(4), fine = gap(8);
  CHECK(fine < 0.75 * coarse);
}

TEST_CASE("sweeps") {
  const SphericalSweep one{SphericalSweep::Variable::Theta, 2.0, 0.5, 0.7, 1.9, 1};
  REQUIRE(one.coords().size() == 1);
  CHECK(one.coords()[0] == 0.7);
  const Vec3 x = one.point(0.7);
  CHECK(x.norm() == doctest::Approx(2.0));
  CHECK(std::acos(x.z() / 2.0) == doctest::Approx(0.7));
  const SphericalSweep none{SphericalSweep::Variable::Phi, 1.0, 0.0, 0.0, 1.0, 0};
  CHECK_THROWS_AS(none.coords(), DomainError);
}

TEST_CASE("probe CSV round trip") {
  ProbeLine line{{0.0, 0.5}, {CVec3(cplx(1, 2), cplx(3, 4), cplx(5, 6)), CVec3(cplx(-1e-9, 0), 0.0, cplx(0, 7))}};
  std::stringstream ss;
  write_probe_csv(ss, line);
  const ProbeLine back = read_probe_csv(ss);
  REQUIRE(back.coords.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back.coords[i] == line.coords[i]);
    CHECK((back.fields[i] - line.fields[i]).norm() < 1e-10);
  }
  std::stringstream bad("coord,ReEx,ImEx,ReEy,ImEy,ReEz,ImEz\n0,1,2,3\n");
  CHECK_THROWS_WITH_AS(read_probe_csv(bad), doctest::Contains("line 2"), FormatError);
  std::stringstream nohdr("0,1,2,3,4,5,6\n");
  CHECK_THROWS_AS(read_probe_csv(nohdr), FormatError);
}
