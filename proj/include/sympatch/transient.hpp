#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sympatch/assembly.hpp"
#include "sympatch/meshgen.hpp"

namespace sympatch {

/// Field source J(x, t) in the units of the A rows (already multiplied by mu0).
using TransientSource = std::function<Vec3(const Vec3&, double, const Material&)>;
using TimeField = std::function<Vec3(const Vec3&, double)>;

struct TransientSetup {
  MaterialTable materials;
  TransientParams params;
  double dt = 1e-9;
  SolverOptions solver;
  std::vector<PatchPlane> symmetry_planes;
  bool psi_on_patch_outer_face = true;

  TransientSource source;                         // empty: no volume source
  std::function<bool(const Material&)> active;    // elements that carry the source (all when empty)
  /// Scattered-field PEC lift: incident vector potential and its time derivative.
  TimeField lift_A, lift_dA;
  /// Initial nodal A and dA/dt in Cartesian components; psi and its rate start at zero.
  std::function<std::pair<Vec3, Vec3>(const Vec3&)> initial;
  /// Analytic incident field and its time derivative, added to total-field probes.
  TimeField incident_E;
};

/// Free and constrained parts of u = (A, psi) and w = du/dt, plus the free load at `time`.
struct TransientState {
  double time = 0.0;
  Vector<double> u, w;
  Vector<double> uc, wc;
  Vector<double> f;
};

class TransientSolver {
 public:
  /// Assembles the blocks and factorizes the step matrix once.
  TransientSolver(std::shared_ptr<const Mesh> mesh, TransientSetup setup);
  ~TransientSolver();
  TransientSolver(TransientSolver&&) noexcept;

  TransientState initial_state() const;
  /// One implicit-midpoint step of length dt.
  TransientState step(const TransientState& s) const;
  /// 1/2 w'Mw + 1/2 u'Ku over the free slots (exact for homogeneous constraints).
  double energy(const TransientState& s) const;
  /// E = -(dA/dt + grad dpsi/dt) at x, reflected through the symmetry planes as needed.
  Vec3 E_at(const TransientState& s, const Vec3& x, bool total_field = false) const;

  const Mesh& mesh() const { return *mesh_; }
  const DofMap& dofs() const { return *dofs_; }
  const TransientBlocks& blocks() const { return blocks_; }
  const TransientSetup& setup() const { return setup_; }
  int free_count() const { return dofs_->free_count(); }
  Vector<double> nodal_u(const TransientState& s) const { return dofs_->expand(s.u, s.uc); }
  Vector<double> nodal_w(const TransientState& s) const { return dofs_->expand(s.w, s.wc); }

 private:
  Vector<double> load_at(double t) const;
  Vector<double> lift(const TimeField& g, double t) const;

  std::shared_ptr<const Mesh> mesh_;
  TransientSetup setup_;
  std::shared_ptr<const DofMap> dofs_;
  std::shared_ptr<const PointLocator> locator_;
  TransientBlocks blocks_;
  SparseMatrix<double> S_fc_;
  std::unique_ptr<LinearSolver<double>> solver_;
};

/// Stable step of an explicit scheme on this mesh: shortest corner-node edge over
/// c * sqrt(3), halved for the mid-edge nodes of quadratic elements.
double cfl_estimate(const Mesh& mesh, const MaterialTable& materials, double c);

/// Constraints of a transient run: PEC (lifted when scattering), thin patches, bare symmetry planes, and
/// psi = 0 on the absorbing boundary when there is no conductor.
ConstraintSpec transient_constraints(const Mesh& mesh, bool lifted, bool psi_on_patch_outer_face);

struct ProbeSpec {
  std::string label;
  Vec3 x = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();  // component picked by the projection E . direction
  enum class Quantity { E, dE_dt, E_dot_t } quantity = Quantity::E;
  bool total_field = false;
};

struct ProbeSeries {
  ProbeSpec spec;
  std::vector<double> times;
  std::vector<double> values;
};

/// Steps from the initial state to t_end (rounded to whole steps) and samples every probe at
/// every step. Time derivatives come from second-order backward differences of the E samples.
/// `on_step`, when set, sees each state after it is computed.
std::vector<ProbeSeries> run_transient(const TransientSolver& solver, double t_end, const std::vector<ProbeSpec>& probes,
                                       const std::function<void(const TransientState&)>& on_step = {});

void write_series_csv(std::ostream& out, const ProbeSeries& s);
ProbeSeries read_series_csv(std::istream& in);

}  // namespace sympatch
