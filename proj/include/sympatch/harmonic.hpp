#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "sympatch/assembly.hpp"
#include "sympatch/meshgen.hpp"

namespace sympatch {

/// Everything a time-harmonic solve needs besides the mesh.
struct HarmonicProblem {
  MaterialTable materials;
  HarmonicWaveSpec wave;
  HarmonicParams params;
  /// Scattered-field unknowns: PEC surfaces carry minus the incident tangential field and
  /// dielectric regions get the contrast source.
  bool scattering = true;
  /// Planes across which the solved domain is mirrored when probing (one per thin patch).
  std::vector<PatchPlane> symmetry_planes;
  bool psi_on_patch_outer_face = true;
  SolverOptions solver;
};

/// Nodal Cartesian values [Ax Ay Az psi] per node, or their amplitudes in amplitude mode.
struct HarmonicSolution {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const DofMap> dofs;
  std::shared_ptr<const PointLocator> locator;
  Vector<cplx> nodal;
  Formulation formulation = Formulation::Conventional;
  double k0 = 0.0;
  std::vector<PatchPlane> symmetry_planes;
  LinearSolveReport report;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;

  int free_count() const { return dofs->free_count(); }
};

/// Constraint set implied by the mesh tags: PEC (lifted when scattering), thin patches, bare
/// symmetry planes, and psi = 0 on the absorbing boundary when nothing else pins psi.
ConstraintSpec harmonic_constraints(const Mesh& mesh, bool scattering, bool psi_on_patch_outer_face);

HarmonicSolution solve_harmonic(std::shared_ptr<const Mesh> mesh, const HarmonicProblem& problem);

/// E = A + grad psi at a point, with amplitude factors restored. Points outside the solved
/// domain are reflected through the symmetry planes. Throws DomainError when no element holds x.
CVec3 eval_E(const HarmonicSolution& sol, const Vec3& x);

/// Uniform sweep of theta or phi at fixed radius and the other angle.
struct SphericalSweep {
  enum class Variable { Theta, Phi };
  Variable variable = Variable::Phi;
  double r = 1.0;
  double fixed = 0.0;  // the angle that is not swept
  double from = 0.0;
  double to = 0.0;
  int samples = 1;

  std::vector<double> coords() const;
  Vec3 point(double coord) const;
};

struct ProbeLine {
  std::vector<double> coords;
  std::vector<CVec3> fields;
};

ProbeLine probe_line(const HarmonicSolution& sol, const SphericalSweep& sweep);
void write_probe_csv(std::ostream& out, const ProbeLine& line);
ProbeLine read_probe_csv(std::istream& in);

}  // namespace sympatch
