#include "sympatch/cases.hpp"

#include <chrono>
#include <fstream>
#include <json.hpp>

#include "sympatch/oracles.hpp"

namespace sympatch {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Span span_of(const CaseConfig& cfg) { return cfg.domain == DomainMode::Full ? Span::Full : Span::Half; }

PhysicalConstants constants(const CaseConfig& cfg) {
  return cfg.c_override ? PhysicalConstants::with_speed_of_light(*cfg.c_override) : PhysicalConstants::codata();
}

MaterialTable materials_of(const CaseConfig& cfg) {
  MaterialTable m;
  m.by_region = {Material()};
  if (cfg.kind == CaseKind::SphereDielectricHarmonic || cfg.kind == CaseKind::SphereDielectricTransient)
    m.by_region.push_back(Material(cfg.eps_r, cfg.mu_r));
  return m;
}

HarmonicWaveSpec wave_of(const CaseConfig& cfg) {
  return HarmonicWaveSpec::from_k0(cfg.k0, cfg.E0, cfg.direction, cfg.polarization, constants(cfg));
}

std::vector<double> time_grid(const CaseConfig& cfg) {
  const long steps = std::lround(cfg.t_end / cfg.dt);
  std::vector<double> t(steps + 1);
  for (long i = 0; i <= steps; ++i) t[i] = i * cfg.dt;
  return t;
}

void write_file(const std::filesystem::path& path, auto&& writer) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  writer(out);
  if (!out) throw FormatError("write failed: " + path.string());
}

}  // namespace

CaseMesh build_case_mesh(const CaseConfig& cfg) {
  cfg.validate();
  const auto div = cfg.element_divisions();
  const double t = cfg.effective_patch_thickness();
  CaseMesh out;
  switch (cfg.kind) {
    case CaseKind::CavityCubeTransient: {
      if (cfg.domain == DomainMode::Full) {
        out.mesh = gen_cuboid(cfg.lengths, div);
        break;
      }
      const double hx = cfg.lengths.x() / 2, hz = cfg.lengths.z() / 2;
      out.mesh = gen_cuboid({hx, cfg.lengths.y(), hz}, div);
      retag_plane(out.mesh, 0, hx, BoundaryTag::symmetry_plane(0));
      retag_plane(out.mesh, 2, hz, BoundaryTag::symmetry_plane(2));
      out.planes = {{0, hx}, {2, hz}};
      break;
    }
    case CaseKind::SpherePecHarmonic:
    case CaseKind::SpherePecTransient:
      out.mesh = gen_spherical_shell(cfg.a, cfg.R_inf, {div[0], div[1], div[2]}, span_of(cfg));
      break;
    case CaseKind::EllipsoidPecHarmonic:
      out.mesh = gen_ellipsoidal_shell(cfg.a, cfg.c_axis, cfg.R_inf, {div[0], div[1], div[2]}, span_of(cfg));
      break;
    case CaseKind::SphereDielectricHarmonic:
    case CaseKind::SphereDielectricTransient:
      out.mesh = gen_dielectric_sphere(cfg.a, cfg.R_inf, cfg.n_inside, div[0] - cfg.n_inside, div[1], div[2],
                                       span_of(cfg), 1);
      break;
  }
  if (cfg.domain == DomainMode::SymmetricHalf) out.planes = {{1, 0.0}};
  if (cfg.symmetry == SymmetryTreatment::Patch)
    for (const PatchPlane& p : out.planes) out.mesh = attach_thin_patch(out.mesh, p, t);
  return out;
}

HarmonicProblem harmonic_problem(const CaseConfig& cfg, const std::vector<PatchPlane>& planes) {
  HarmonicProblem p;
  p.materials = materials_of(cfg);
  p.wave = wave_of(cfg);
  p.params.k0 = cfg.k0;
  p.params.formulation = cfg.formulation;
  p.params.alpha = cfg.alpha;
  p.params.quad_order = cfg.quad_order;
  p.scattering = true;
  p.symmetry_planes = planes;
  p.psi_on_patch_outer_face = cfg.psi_on_patch_outer_face;
  p.solver = cfg.solver;
  return p;
}

TransientSetup transient_setup(const CaseConfig& cfg, const std::vector<PatchPlane>& planes) {
  const PhysicalConstants pc = constants(cfg);
  TransientSetup s;
  s.materials = materials_of(cfg);
  s.params.c = pc.c;
  s.params.alpha = cfg.alpha;
  s.params.quad_order = cfg.quad_order;
  s.dt = cfg.dt;
  s.solver = cfg.solver;
  s.symmetry_planes = planes;
  s.psi_on_patch_outer_face = cfg.psi_on_patch_outer_face;

  NeumannPulseSpec pulse = cfg.pulse;
  pulse.c = pc.c;
  switch (cfg.kind) {
    case CaseKind::CavityCubeTransient: {
      const double omega = cfg.omega, eps0 = pc.eps0, mu0 = pc.mu0;
      s.source = [=](const Vec3& x, double t, const Material&) {
        return Vec3(mu0 * cavity_fields(x, t, omega, eps0, mu0).j);
      };
      s.initial = [=](const Vec3& x) {
        const CavityFields f = cavity_fields(x, 0.0, omega, eps0, mu0);
        return std::make_pair(f.A, Vec3(-f.E));
      };
      break;
    }
    case CaseKind::SpherePecTransient:
      s.lift_A = [=](const Vec3& x, double t) { return neumann_pulse_potential(pulse, t, x); };
      s.lift_dA = [=](const Vec3& x, double t) { return Vec3(-neumann_pulse(pulse, t, x).E); };
      s.incident_E = [=](const Vec3& x, double t) { return neumann_pulse(pulse, t, x).E; };
      break;
    case CaseKind::SphereDielectricTransient: {
      const double c2 = pc.c * pc.c;
      // Scattered-field form: the contrast acts as a polarization current driven by the incident pulse.
      s.source = [=](const Vec3& x, double t, const Material& m) {
        return Vec3((m.eps_r() - 1.0) / c2 * neumann_pulse(pulse, t, x).dE_dt);
      };
      s.active = [](const Material& m) { return m.eps_r() != 1.0; };
      s.incident_E = [=](const Vec3& x, double t) { return neumann_pulse(pulse, t, x).E; };
      break;
    }
    default:
      throw ConfigError("not a transient case: " + to_string(cfg.kind));
  }
  return s;
}

ProbeLine oracle_line(const CaseConfig& cfg, const ProbeConfig& probe) {
  if (probe.type == ProbeConfig::Type::Point) throw ConfigError("probe '" + probe.name + "' is not a sweep");
  const HarmonicWaveSpec wave = wave_of(cfg);
  ProbeLine line;
  line.coords = probe.sweep.coords();
  for (double c : line.coords) {
    const Vec3 x = probe.sweep.point(c);
    const SphericalPoint sp = to_spherical(x);
    switch (cfg.kind) {
      case CaseKind::SpherePecHarmonic:
        line.fields.push_back(mie_pec_sphere(cfg.k0, cfg.a, cfg.E0, sp));
        break;
      case CaseKind::SphereDielectricHarmonic: {
        CVec3 e = stratton_dielectric_sphere(cfg.k0, cfg.a, cfg.eps_r, cfg.mu_r, cfg.E0, sp);
        if (sp.r < cfg.a) e -= plane_wave_field(wave, x);
        line.fields.push_back(e);
        break;
      }
      default:
        throw ConfigError("no closed-form sweep reference for " + to_string(cfg.kind));
    }
  }
  return line;
}

ProbeSeries oracle_series(const CaseConfig& cfg, const ProbeConfig& probe, const std::vector<double>& times) {
  if (cfg.kind != CaseKind::CavityCubeTransient)
    throw ConfigError("no closed-form time series for " + to_string(cfg.kind));
  const PhysicalConstants pc = constants(cfg);
  const ProbeSpec& spec = probe.point;
  const Vec3 dir = spec.quantity == ProbeSpec::Quantity::E_dot_t ? spec.direction.normalized() : spec.direction;
  auto E = [&](double t) { return cavity_fields(spec.x, t, cfg.omega, pc.eps0, pc.mu0).E.dot(dir); };
  ProbeSeries s;
  s.spec = spec;
  s.times = times;
  const double h = 1e-4 / cfg.omega;
  for (double t : times)
    s.values.push_back(spec.quantity == ProbeSpec::Quantity::dE_dt ? (E(t + h) - E(t - h)) / (2 * h) : E(t));
  return s;
}

bool ProbeResult::within_tolerance() const {
  if (!config.tolerance || !metrics) return true;
  return metrics->linf_rel_peak <= *config.tolerance;
}

bool CaseRun::within_tolerance() const {
  for (const auto& p : probes)
    if (!p.within_tolerance()) return false;
  return true;
}

std::string RunReport::to_json(const std::vector<ProbeResult>& probes) const {
  using nlohmann::json;
  json j;
  j["case"] = case_name;
  j["kind"] = to_string(kind);
  j["domain"] = to_string(domain);
  j["node_count"] = node_count;
  j["element_count"] = element_count;
  j["equation_count"] = equation_count;
  j["wall_time_s"] = wall_seconds;
  j["assembly_time_s"] = assembly_seconds;
  j["solve_time_s"] = solve_seconds;
  j["residual"] = residual ? json(*residual) : json(nullptr);
  if (steps > 0 || energy_initial) {
    j["steps"] = steps;
    j["energy_initial"] = energy_initial ? json(*energy_initial) : json(nullptr);
    j["energy_final"] = energy_final ? json(*energy_final) : json(nullptr);
  }
  j["outputs"] = outputs;
  json pj = json::object();
  for (const auto& p : probes) {
    json e;
    if (p.metrics) {
      e["l2_rel"] = p.metrics->l2_rel;
      e["linf_rel_peak"] = p.metrics->linf_rel_peak;
      e["peak"] = p.metrics->peak;
      e["samples"] = p.metrics->samples;
    }
    if (p.config.tolerance) {
      e["tolerance"] = *p.config.tolerance;
      e["pass"] = p.within_tolerance();
    }
    pj[p.config.name] = e.is_null() ? json::object() : e;
  }
  j["probes"] = pj;
  return j.dump(2);
}

CaseRun run_case(const CaseConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
  const auto t0 = Clock::now();
  CaseMesh cm = build_case_mesh(cfg);
  auto mesh = std::make_shared<const Mesh>(std::move(cm.mesh));

  CaseRun run;
  RunReport& rep = run.report;
  rep.case_name = cfg.name;
  rep.kind = cfg.kind;
  rep.domain = cfg.domain;
  rep.node_count = static_cast<int>(mesh->nodes.size());
  rep.element_count = static_cast<int>(mesh->elements.size());

  if (!is_transient(cfg.kind)) {
    const HarmonicSolution sol = solve_harmonic(mesh, harmonic_problem(cfg, cm.planes));
    rep.equation_count = sol.free_count();
    rep.assembly_seconds = sol.assembly_seconds;
    rep.solve_seconds = sol.solve_seconds;
    rep.residual = sol.report.residual_norm_relative;
    for (const auto& pc : cfg.probes) {
      ProbeResult r;
      r.config = pc;
      r.line = probe_line(sol, pc.sweep);
      if (pc.oracle) {
        r.oracle_line = oracle_line(cfg, pc);
        r.metrics = compare_lines(*r.oracle_line, *r.line);
      }
      run.probes.push_back(std::move(r));
    }
  } else {
    const auto ta = Clock::now();
    const TransientSolver solver(mesh, transient_setup(cfg, cm.planes));
    rep.assembly_seconds = seconds_since(ta);
    rep.equation_count = solver.free_count();
    std::vector<ProbeSpec> specs;
    for (const auto& pc : cfg.probes) specs.push_back(pc.point);
    const auto ts = Clock::now();
    rep.energy_initial = solver.energy(solver.initial_state());
    std::optional<TransientState> last;
    const auto series = run_transient(solver, cfg.t_end, specs, [&](const TransientState& s) { last = s; });
    rep.steps = static_cast<int>(std::lround(cfg.t_end / cfg.dt));
    rep.energy_final = last ? solver.energy(*last) : *rep.energy_initial;
    rep.solve_seconds = seconds_since(ts);
    for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
      ProbeResult r;
      r.config = cfg.probes[i];
      r.series = series[i];
      if (r.config.oracle) {
        r.oracle_series = oracle_series(cfg, r.config, series[i].times);
        r.metrics = compare_series(*r.oracle_series, *r.series);
      }
      run.probes.push_back(std::move(r));
    }
  }
  rep.wall_seconds = seconds_since(t0);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    for (const auto& r : run.probes) {
      const auto base = *out_dir / r.config.name;
      const auto main = base.string() + ".csv";
      const auto ref = base.string() + "_oracle.csv";
      if (r.line) write_file(main, [&](std::ostream& o) { write_probe_csv(o, *r.line); });
      if (r.series) write_file(main, [&](std::ostream& o) { write_series_csv(o, *r.series); });
      rep.outputs.push_back(main);
      if (r.oracle_line) write_file(ref, [&](std::ostream& o) { write_probe_csv(o, *r.oracle_line); });
      if (r.oracle_series) write_file(ref, [&](std::ostream& o) { write_series_csv(o, *r.oracle_series); });
      if (r.oracle_line || r.oracle_series) rep.outputs.push_back(ref);
    }
    const auto report_path = *out_dir / "report.json";
    rep.outputs.push_back(report_path.string());
    write_file(report_path, [&](std::ostream& o) { o << rep.to_json(run.probes) << "\n"; });
  }
  return run;
}

std::vector<std::string> write_oracles(const CaseConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  for (const auto& p : cfg.probes) {
    if (!p.oracle) continue;
    const std::string path = (out_dir / (p.name + "_oracle.csv")).string();
    if (p.type == ProbeConfig::Type::Point) {
      const ProbeSeries s = oracle_series(cfg, p, time_grid(cfg));
      write_file(path, [&](std::ostream& o) { write_series_csv(o, s); });
    } else {
      const ProbeLine l = oracle_line(cfg, p);
      write_file(path, [&](std::ostream& o) { write_probe_csv(o, l); });
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace sympatch
