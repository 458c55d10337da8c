#pragma once

#include <functional>
#include <vector>

#include "sympatch/dofmap.hpp"
#include "sympatch/elements.hpp"
#include "sympatch/mesh.hpp"
#include "sympatch/sparse.hpp"

namespace sympatch {

// Element blocks use node-major Cartesian ordering: row 4*i + c is component c of node i,
// with c = 0..2 for A and c = 3 for psi.

enum class Formulation { Conventional, Amplitude };
std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& s);

/// Material per element region. Regions without an entry are vacuum.
struct MaterialTable {
  std::vector<Material> by_region;
  const Material& operator()(int region) const;
};

struct HarmonicParams {
  double k0 = 1.0;
  Formulation formulation = Formulation::Conventional;
  double alpha = 1.0;  // gauge regularization weight
  int quad_order = 3;
};

/// Volume source of the harmonic system. `field` J is tested against the A test functions and
/// against the gradients of the psi test functions; `scalar` q is tested against the psi test
/// functions themselves. Either may be empty.
struct HarmonicLoad {
  std::function<CVec3(const Vec3&, const Material&)> field;
  std::function<cplx(const Vec3&, const Material&)> scalar;
  bool empty() const { return !field && !scalar; }
};

template <class S>
struct ElementContribution {
  Eigen::Matrix<S, -1, -1> K;  // may be empty for load-only passes
  Eigen::Matrix<S, -1, 1> f;   // may be empty
};

/// Volume block (and load, when `load` is non-empty) of one element.
/// Amplitude mode throws DomainError when a quadrature point sits at the origin.
ElementContribution<cplx> element_harmonic(const ElementGeometry& geom, const Material& mat, const HarmonicParams& p,
                                           const HarmonicLoad& load = {});

/// First-order absorbing condition on one face, acting on the tangential field.
Eigen::MatrixXcd element_abc(const ElementGeometry& geom, int face, const Material& mat, const HarmonicParams& p);

/// k0^2 (eps_r - 1) E_inc as a field load; throws DomainError where mu_r != 1.
HarmonicLoad dielectric_contrast_load(const HarmonicWaveSpec& wave);

/// Real blocks of M u'' + C u' + K u = f in units where the mass carries eps_r / c^2.
struct TransientElement {
  Eigen::MatrixXd M;
  Eigen::MatrixXd K;
};

struct TransientParams {
  double c = 299792458.0;
  double alpha = 1.0;
  int quad_order = 3;
};

TransientElement element_transient(const ElementGeometry& geom, const Material& mat, const TransientParams& p);
/// Damping block of the first-order absorbing condition on one face.
Eigen::MatrixXd element_transient_abc(const ElementGeometry& geom, int face, const Material& mat,
                                      const TransientParams& p);
/// Load from a real field J tested against A test functions and psi test gradients.
Eigen::VectorXd element_transient_load(const ElementGeometry& geom, const Material& mat,
                                       const std::function<Vec3(const Vec3&, const Material&)>& J, int quad_order);

/// Operator split into free rows/free columns and free rows/constrained columns.
template <class S>
struct ReducedOperator {
  SparseMatrix<S> ff;
  Eigen::SparseMatrix<S, Eigen::ColMajor, int> fc;

  /// Free rows of the operator applied to a full (free, constrained) vector.
  Vector<S> apply(const Vector<S>& free, const Vector<S>& constrained) const { return ff * free + fc * constrained; }
};

/// Scatter-add of per-element contributions with frame rotation and Dirichlet elimination.
/// Elements are processed in parallel chunks and merged in element order, so the result does
/// not depend on the worker count. `load` receives the free rows of the element loads.
template <class S>
ReducedOperator<S> assemble_global(const Mesh& mesh, const DofMap& dofs,
                                   const std::function<ElementContribution<S>(int)>& element,
                                   Vector<S>* load = nullptr);

/// Reduced harmonic system: K u_f = rhs with the constrained values folded in.
struct HarmonicBlocks {
  ReducedOperator<cplx> op;
  Vector<cplx> load;  // free rows of the volume load
  Vector<cplx> rhs;   // load - K_fc u_c
};

HarmonicBlocks assemble_harmonic(const Mesh& mesh, const DofMap& dofs, const MaterialTable& materials,
                                 const HarmonicParams& p, const HarmonicLoad& load,
                                 const Vector<cplx>& constrained_values);

struct TransientBlocks {
  ReducedOperator<double> M;
  ReducedOperator<double> C;
  ReducedOperator<double> K;
};

TransientBlocks assemble_transient(const Mesh& mesh, const DofMap& dofs, const MaterialTable& materials,
                                   const TransientParams& p);

/// Free rows of the load for a field source J(x) restricted to elements where `active` holds
/// (all elements when empty).
Vector<double> transient_load(const Mesh& mesh, const DofMap& dofs, const MaterialTable& materials,
                              const std::function<Vec3(const Vec3&, const Material&)>& J, int quad_order,
                              const std::function<bool(const Material&)>& active = {});

/// Facets carrying `kind`, grouped by element.
std::vector<std::vector<int>> facets_by_element(const Mesh& mesh, BoundaryKind kind);

}  // namespace sympatch
