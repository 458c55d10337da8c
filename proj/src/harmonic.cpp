#include "sympatch/harmonic.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>

#include "sympatch/oracles.hpp"
#include "sympatch/probe.hpp"

namespace sympatch {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ConstraintSpec harmonic_constraints(const Mesh& mesh, bool scattering, bool psi_on_patch_outer_face) {
  ConstraintSpec spec(mesh.nodes.size());
  if (mesh.has_tag(BoundaryKind::PEC)) spec = apply_pec(std::move(spec), mesh, BoundaryKind::PEC, scattering);
  if (mesh.has_tag(BoundaryKind::SymPatchOuter))
    spec = apply_symmetry_patch(std::move(spec), mesh, psi_on_patch_outer_face);
  if (mesh.has_tag(BoundaryKind::SymmetryPlane)) spec = apply_symmetry_plane(std::move(spec), mesh);
  // Without a conductor nothing fixes the additive constant of psi.
  if (!mesh.has_tag(BoundaryKind::PEC) && mesh.has_tag(BoundaryKind::ABC))
    spec = apply_psi_zero(std::move(spec), mesh, BoundaryKind::ABC);
  return spec;
}

HarmonicSolution solve_harmonic(std::shared_ptr<const Mesh> mesh, const HarmonicProblem& problem) {
  problem.wave.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const HarmonicParams& p = problem.params;
  const bool amplitude = p.formulation == Formulation::Amplitude;
  const bool contrast = std::any_of(mesh->elements.begin(), mesh->elements.end(), [&](const Element& e) {
    const Material& m = problem.materials(e.region);
    return m.eps_r() != 1.0 || m.mu_r() != 1.0;
  });
  if (amplitude && contrast) throw ConfigError("the amplitude formulation supports exterior vacuum domains only");

  auto dofs = std::make_shared<DofMap>(
      build_dof_map(*mesh, harmonic_constraints(*mesh, problem.scattering, problem.psi_on_patch_outer_face)));
  const HarmonicWaveSpec wave = problem.wave;
  const double k0 = p.k0;
  std::function<CVec3(const Vec3&)> lift;
  if (problem.scattering) {
    lift = [wave, k0, amplitude](const Vec3& x) -> CVec3 {
      const CVec3 e = plane_wave_field(wave, x);
      if (!amplitude) return e;
      const double r = x.norm();
      return e * (r * std::exp(cplx(0.0, k0 * r)));  // divide by e^{-ikr}/r
    };
  }
  const Vector<cplx> uc = dofs->constrained_values<cplx>(*mesh, lift);
  HarmonicLoad load;
  if (problem.scattering && contrast) load = dielectric_contrast_load(wave);
  const HarmonicBlocks blocks = assemble_harmonic(*mesh, *dofs, problem.materials, p, load, uc);

  HarmonicSolution sol;
  sol.assembly_seconds = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const Vector<cplx> uf = solve(blocks.op.ff, blocks.rhs, problem.solver, &sol.report);
  sol.solve_seconds = seconds_since(t1);
  sol.nodal = dofs->expand(uf, uc);
  sol.mesh = mesh;
  sol.dofs = dofs;
  sol.locator = std::make_shared<PointLocator>(*mesh, mesh->patch_mask());
  sol.formulation = p.formulation;
  sol.k0 = k0;
  sol.symmetry_planes = problem.symmetry_planes;
  return sol;
}

CVec3 eval_E(const HarmonicSolution& sol, const Vec3& x) {
  const auto s = sample_potentials<cplx>(*sol.mesh, *sol.locator, sol.symmetry_planes, sol.nodal, x);
  CVec3 E = s.A + s.grad_psi;
  if (sol.formulation == Formulation::Amplitude) {
    // grad(f psi) = f (grad psi - a psi) with a = (1/r + ik) rhat.
    const double r = s.x.norm();
    const cplx f = std::exp(cplx(0.0, -sol.k0 * r)) / r;
    const CVec3 a = cplx(1.0 / r, sol.k0) * (s.x / r).cast<cplx>();
    E = f * (s.A + s.grad_psi - a * s.psi);
  }
  return E.cwiseProduct(s.signs.cast<cplx>());
}

std::vector<double> SphericalSweep::coords() const {
  if (samples < 1) throw DomainError("a sweep needs at least one sample");
  std::vector<double> c(samples);
  for (int i = 0; i < samples; ++i) c[i] = samples == 1 ? from : from + (to - from) * i / (samples - 1);
  return c;
}

Vec3 SphericalSweep::point(double coord) const {
  return variable == Variable::Phi ? to_cartesian({r, fixed, coord}) : to_cartesian({r, coord, fixed});
}

ProbeLine probe_line(const HarmonicSolution& sol, const SphericalSweep& sweep) {
  ProbeLine line;
  line.coords = sweep.coords();
  for (double c : line.coords) line.fields.push_back(eval_E(sol, sweep.point(c)));
  return line;
}

void write_probe_csv(std::ostream& out, const ProbeLine& line) { write_field_csv(out, line.coords, line.fields); }

ProbeLine read_probe_csv(std::istream& in) {
  std::string text;
  if (!std::getline(in, text)) throw FormatError("empty probe file");
  if (text.rfind("coord,ReEx", 0) != 0) throw FormatError("probe file lacks the field header");
  ProbeLine line;
  int lineno = 1;
  while (std::getline(in, text)) {
    ++lineno;
    if (text.empty()) continue;
    std::istringstream row(text);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != 7) throw FormatError("line " + std::to_string(lineno) + ": expected 7 columns");
    line.coords.push_back(v[0]);
    line.fields.emplace_back(cplx(v[1], v[2]), cplx(v[3], v[4]), cplx(v[5], v[6]));
  }
  return line;
}

}  // namespace sympatch
