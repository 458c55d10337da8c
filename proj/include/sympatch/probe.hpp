#pragma once

#include <vector>

#include "sympatch/mesh.hpp"
#include "sympatch/errors.hpp"
#include "sympatch/meshgen.hpp"

namespace sympatch {

/// Interpolated potentials at a probe point. `x` is the point inside the solved domain (after
/// any reflections) and `signs` the component flips that carry vectors back to the probe.
template <class S>
struct PotentialSample {
  Eigen::Matrix<S, 3, 1> A;
  Eigen::Matrix<S, 3, 1> grad_psi;
  S psi;
  Vec3 x;
  Vec3 signs;
};

/// Locates x (reflecting through symmetry planes when needed) and interpolates nodal
/// [Ax Ay Az psi] values. Vector results are returned in the domain frame; apply `signs` to map
/// them to the probe point. Throws DomainError when no element contains the point.
template <class S>
PotentialSample<S> sample_potentials(const Mesh& mesh, const PointLocator& locator,
                                     const std::vector<PatchPlane>& planes,
                                     const Eigen::Matrix<S, -1, 1>& nodal, const Vec3& x);

}  // namespace sympatch
