#include "sympatch/probe.hpp"

#include <sstream>

namespace sympatch {

template <class S>
PotentialSample<S> sample_potentials(const Mesh& mesh, const PointLocator& locator,
                                     const std::vector<PatchPlane>& planes,
                                     const Eigen::Matrix<S, -1, 1>& nodal, const Vec3& x) {
  if (nodal.size() != 4 * Eigen::Index(mesh.nodes.size())) throw DomainError("nodal vector does not match the mesh");
  const int count = int(planes.size());
  for (int mask = 0; mask < (1 << count); ++mask) {
    Vec3 y = x, signs = Vec3::Ones();
    for (int k = 0; k < count; ++k)
      if (mask & (1 << k)) {
        const auto m = mirror_probe(y, planes[k].axis, planes[k].value);
        y = m.x;
        signs = signs.cwiseProduct(m.signs);
      }
    const auto hit = locator.locate(y);
    if (!hit) continue;
    const ElementGeometry geom = mesh.geometry(hit->element);
    const MappedPoint mp = map_physical(geom, hit->xi);
    const auto N = shape_values(geom.kind, hit->xi);
    const auto& conn = mesh.elements[hit->element].conn;
    PotentialSample<S> s{Eigen::Matrix<S, 3, 1>::Zero(), Eigen::Matrix<S, 3, 1>::Zero(), S(0), mp.x, signs};
    for (std::size_t i = 0; i < conn.size(); ++i) {
      const auto u = nodal.template segment<4>(4 * conn[i]);
      s.A += N[i] * u.template head<3>();
      s.psi += N[i] * u[3];
      s.grad_psi += mp.grads[i].template cast<S>() * u[3];
    }
    return s;
  }
  std::ostringstream msg;
  msg << "probe point (" << x.transpose() << ") lies outside the solved domain";
  throw DomainError(msg.str());
}

template PotentialSample<double> sample_potentials<double>(const Mesh&, const PointLocator&,
                                                           const std::vector<PatchPlane>&, const Eigen::VectorXd&,
                                                           const Vec3&);
template PotentialSample<cplx> sample_potentials<cplx>(const Mesh&, const PointLocator&,
                                                       const std::vector<PatchPlane>&, const Eigen::VectorXcd&,
                                                       const Vec3&);

}  // namespace sympatch
