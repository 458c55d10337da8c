#include "sympatch/transient.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "sympatch/probe.hpp"

namespace sympatch {

ConstraintSpec transient_constraints(const Mesh& mesh, bool lifted, bool psi_on_patch_outer_face) {
  ConstraintSpec spec(mesh.nodes.size());
  if (mesh.has_tag(BoundaryKind::PEC)) spec = apply_pec(std::move(spec), mesh, BoundaryKind::PEC, lifted);
  if (mesh.has_tag(BoundaryKind::SymPatchOuter))
    spec = apply_symmetry_patch(std::move(spec), mesh, psi_on_patch_outer_face);
  if (mesh.has_tag(BoundaryKind::SymmetryPlane)) spec = apply_symmetry_plane(std::move(spec), mesh);
  if (!mesh.has_tag(BoundaryKind::PEC) && mesh.has_tag(BoundaryKind::ABC))
    spec = apply_psi_zero(std::move(spec), mesh, BoundaryKind::ABC);
  return spec;
}

TransientSolver::TransientSolver(std::shared_ptr<const Mesh> mesh, TransientSetup setup)
    : mesh_(std::move(mesh)), setup_(std::move(setup)) {
  if (!(setup_.dt > 0.0)) throw ConfigError("time step must be positive");
  if (bool(setup_.lift_A) != bool(setup_.lift_dA))
    throw ConfigError("a lifted run needs both the incident potential and its rate");
  dofs_ = std::make_shared<DofMap>(
      build_dof_map(*mesh_, transient_constraints(*mesh_, bool(setup_.lift_A), setup_.psi_on_patch_outer_face)));
  locator_ = std::make_shared<PointLocator>(*mesh_, mesh_->patch_mask());
  blocks_ = assemble_transient(*mesh_, *dofs_, setup_.materials, setup_.params);
  const double dt = setup_.dt;
  const SparseMatrix<double> S = blocks_.M.ff + (0.5 * dt) * blocks_.C.ff + (0.25 * dt * dt) * blocks_.K.ff;
  S_fc_ = blocks_.M.fc + (0.5 * dt) * blocks_.C.fc + (0.25 * dt * dt) * blocks_.K.fc;
  solver_ = std::make_unique<LinearSolver<double>>(S, setup_.solver);
}

TransientSolver::~TransientSolver() = default;
TransientSolver::TransientSolver(TransientSolver&&) noexcept = default;

Vector<double> TransientSolver::load_at(double t) const {
  if (!setup_.source) return Vector<double>::Zero(dofs_->free_count());
  const TransientSource& src = setup_.source;
  return transient_load(
      *mesh_, *dofs_, setup_.materials, [&](const Vec3& x, const Material& m) { return src(x, t, m); },
      setup_.params.quad_order, setup_.active);
}

Vector<double> TransientSolver::lift(const TimeField& g, double t) const {
  if (!g) return dofs_->constrained_values<double>(*mesh_);
  return dofs_->constrained_values<double>(*mesh_, [&](const Vec3& x) { return g(x, t); });
}

TransientState TransientSolver::initial_state() const {
  TransientState s;
  s.time = 0.0;
  s.u = Vector<double>::Zero(dofs_->free_count());
  s.w = s.u;
  s.uc = lift(setup_.lift_A, 0.0);
  s.wc = lift(setup_.lift_dA, 0.0);
  if (setup_.initial) {
    for (int n = 0; n < int(mesh_->nodes.size()); ++n) {
      const auto [A, v] = setup_.initial(mesh_->nodes[n]);
      const Mat3& R = dofs_->frame(n);
      const Vec3 a = R.transpose() * A, b = R.transpose() * v;
      for (int c = 0; c < 3; ++c) {
        const int k = dofs_->slot(n, c);
        if (k < 0) continue;
        s.u[k] = a[c];
        s.w[k] = b[c];
      }
    }
  }
  s.f = load_at(0.0);
  return s;
}

TransientState TransientSolver::step(const TransientState& s) const {
  const double dt = setup_.dt;
  TransientState n;
  n.time = s.time + dt;
  n.uc = lift(setup_.lift_A, n.time);
  n.wc = lift(setup_.lift_dA, n.time);
  n.f = load_at(n.time);
  // Average acceleration: (M + dt/2 C + dt^2/4 K) u1 = M (u0 + dt w0) + dt/2 C u0 - dt^2/4 K u0
  //                                                   + dt^2/2 (f0 + f1)/2.
  const Vector<double> uw = s.u + dt * s.w, uwc = s.uc + dt * s.wc;
  Vector<double> rhs = blocks_.M.apply(uw, uwc) + (0.5 * dt) * blocks_.C.apply(s.u, s.uc) -
                       (0.25 * dt * dt) * blocks_.K.apply(s.u, s.uc) + (0.25 * dt * dt) * (s.f + n.f) -
                       S_fc_ * n.uc;
  n.u = solver_->solve(rhs);
  n.w = (2.0 / dt) * (n.u - s.u) - s.w;
  return n;
}

double TransientSolver::energy(const TransientState& s) const {
  return 0.5 * s.w.dot(blocks_.M.ff * s.w) + 0.5 * s.u.dot(blocks_.K.ff * s.u);
}

Vec3 TransientSolver::E_at(const TransientState& s, const Vec3& x, bool total_field) const {
  const auto p = sample_potentials<double>(*mesh_, *locator_, setup_.symmetry_planes, nodal_w(s), x);
  Vec3 E = -(p.A + p.grad_psi).cwiseProduct(p.signs);
  if (total_field) {
    if (!setup_.incident_E) throw ConfigError("total-field probes need an incident field");
    E += setup_.incident_E(x, s.time);
  }
  return E;
}

double cfl_estimate(const Mesh& mesh, const MaterialTable& materials, double c) {
  double best = std::numeric_limits<double>::infinity();
  for (const Element& el : mesh.elements) {
    const auto& ref = reference_element(el.kind);
    const double speed = c / materials(el.region).index();
    // Corner nodes are the ones whose reference coordinates are all +-1 (or 0/1 for wedges).
    std::vector<Vec3> corners;
    for (std::size_t i = 0; i < el.conn.size(); ++i) {
      const Vec3& xi = ref.node_local_coords[i];
      bool corner = true;
      for (int d = 0; d < 3; ++d) corner = corner && (std::abs(xi[d]) == 1.0 || (el.kind == ElementKind::W18 && d < 2 && (xi[d] == 0.0 || xi[d] == 1.0)));
      if (corner) corners.push_back(mesh.nodes[el.conn[i]]);
    }
    for (std::size_t i = 0; i < corners.size(); ++i)
      for (std::size_t j = i + 1; j < corners.size(); ++j) {
        const double h = (corners[i] - corners[j]).norm();
        if (h > 1e-12 * mesh.diameter()) best = std::min(best, 0.5 * h / (speed * std::sqrt(3.0)));
      }
  }
  return best;
}

std::vector<ProbeSeries> run_transient(const TransientSolver& solver, double t_end, const std::vector<ProbeSpec>& probes,
                                       const std::function<void(const TransientState&)>& on_step) {
  if (t_end < 0.0) throw ConfigError("end time must not be negative");
  const double dt = solver.setup().dt;
  const long steps = std::lround(t_end / dt);
  std::vector<ProbeSeries> out(probes.size());
  std::vector<std::vector<double>> fields(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    out[i].spec = probes[i];
    if (probes[i].direction.norm() == 0.0) throw ConfigError("probe '" + probes[i].label + "' has a zero direction");
  }
  auto sample = [&](const TransientState& s) {
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const Vec3 E = solver.E_at(s, probes[i].x, probes[i].total_field);
      const Vec3 d = probes[i].quantity == ProbeSpec::Quantity::E_dot_t ? probes[i].direction.normalized()
                                                                        : probes[i].direction;
      out[i].times.push_back(s.time);
      fields[i].push_back(E.dot(d));
    }
  };
  TransientState s = solver.initial_state();
  sample(s);
  if (on_step) on_step(s);
  for (long k = 0; k < steps; ++k) {
    s = solver.step(s);
    sample(s);
    if (on_step) on_step(s);
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& v = fields[i];
    if (probes[i].quantity != ProbeSpec::Quantity::dE_dt) {
      out[i].values = v;
      continue;
    }
    out[i].values.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k == 0)
        out[i].values[k] = v.size() > 1 ? (v[1] - v[0]) / dt : 0.0;
      else if (k == 1)
        out[i].values[k] = (v[1] - v[0]) / dt;
      else
        out[i].values[k] = (3.0 * v[k] - 4.0 * v[k - 1] + v[k - 2]) / (2.0 * dt);
    }
  }
  return out;
}

void write_series_csv(std::ostream& out, const ProbeSeries& s) {
  out << "time_s,value\n";
  out.precision(17);
  for (std::size_t k = 0; k < s.times.size(); ++k) out << s.times[k] << ',' << s.values[k] << '\n';
}

ProbeSeries read_series_csv(std::istream& in) {
  std::string text;
  if (!std::getline(in, text) || text.rfind("time_s,value", 0) != 0) throw FormatError("series file lacks its header");
  ProbeSeries s;
  int lineno = 1;
  while (std::getline(in, text)) {
    ++lineno;
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw FormatError("line " + std::to_string(lineno) + ": expected two columns");
    try {
      std::size_t used = 0;
      const double t = std::stod(text.substr(0, comma));
      const std::string rest = text.substr(comma + 1);
      const double v = std::stod(rest, &used);
      if (used != rest.size() && rest.find_first_not_of(" \r", used) != std::string::npos)
        throw std::invalid_argument("trailing");
      if (!s.times.empty() && t <= s.times.back())
        throw FormatError("line " + std::to_string(lineno) + ": times must increase");
      s.times.push_back(t);
      s.values.push_back(v);
    } catch (const std::logic_error&) {
      throw FormatError("line " + std::to_string(lineno) + ": bad number");
    }
  }
  return s;
}

}  // namespace sympatch
