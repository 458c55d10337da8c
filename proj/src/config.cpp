#include "sympatch/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

namespace sympatch {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string s = lower(trim(text));
  if (s.empty()) throw ConfigError("empty number");
  double value = 1.0;
  char op = '*';
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find_first_of("*/", pos);
    // An exponent such as 1e-9 contains no '*' or '/', so the split is safe.
    const std::string tok = trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    double v = 0.0;
    if (tok == "pi") {
      v = std::numbers::pi;
    } else {
      std::size_t used = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ConfigError("not a number: '" + text + "'");
      }
      if (used != tok.size()) throw ConfigError("not a number: '" + text + "'");
    }
    value = op == '*' ? value * v : value / v;
    if (next == std::string::npos) break;
    op = s[next];
    pos = next + 1;
  }
  return value;
}

IniSection::Entry* IniSection::find(const std::string& key) {
  for (auto& [k, e] : entries)
    if (k == key) return &e;
  return nullptr;
}

bool IniSection::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& kv) { return kv.first == key; });
}

std::optional<std::string> IniSection::take(const std::string& key) {
  Entry* e = find(key);
  if (!e) return std::nullopt;
  e->used = true;
  return e->value;
}

namespace {

template <class F>
auto convert(IniSection& sec, const std::string& key, F&& f) -> std::optional<decltype(f(std::string{}))> {
  for (auto& [k, e] : sec.entries) {
    if (k != key) continue;
    e.used = true;
    try {
      return f(e.value);
    } catch (const ConfigError& err) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + key + ": " + err.what());
    }
  }
  return std::nullopt;
}

}  // namespace

std::string IniSection::take_string(const std::string& key, const std::string& fallback) {
  return take(key).value_or(fallback);
}

double IniSection::take_double(const std::string& key, double fallback) {
  return convert(*this, key, [](const std::string& v) { return parse_number(v); }).value_or(fallback);
}

int IniSection::take_int(const std::string& key, int fallback) {
  return convert(*this, key, [](const std::string& v) {
           const double d = parse_number(v);
           if (d != static_cast<int>(d)) throw ConfigError("expected an integer, got '" + v + "'");
           return static_cast<int>(d);
         })
      .value_or(fallback);
}

bool IniSection::take_bool(const std::string& key, bool fallback) {
  return convert(*this, key, [](const std::string& v) {
           const std::string s = lower(v);
           if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
           if (s == "false" || s == "no" || s == "off" || s == "0") return false;
           throw ConfigError("expected true or false, got '" + v + "'");
         })
      .value_or(fallback);
}

Vec3 IniSection::take_vec3(const std::string& key, const Vec3& fallback) {
  return convert(*this, key, [](const std::string& v) {
           const auto parts = split_list(v);
           if (parts.size() != 3) throw ConfigError("expected three numbers, got '" + v + "'");
           return Vec3(parse_number(parts[0]), parse_number(parts[1]), parse_number(parts[2]));
         })
      .value_or(fallback);
}

std::array<int, 3> IniSection::take_int3(const std::string& key, const std::array<int, 3>& fallback) {
  return convert(*this, key, [](const std::string& v) {
           const auto parts = split_list(v);
           if (parts.size() != 3) throw ConfigError("expected three integers, got '" + v + "'");
           std::array<int, 3> out{};
           for (int i = 0; i < 3; ++i) {
             const double d = parse_number(parts[i]);
             if (d != static_cast<int>(d)) throw ConfigError("expected an integer, got '" + parts[i] + "'");
             out[i] = static_cast<int>(d);
           }
           return out;
         })
      .value_or(fallback);
}

void IniSection::reject_unused(const std::string& origin) const {
  for (const auto& [k, e] : entries)
    if (!e.used) fail_at(origin, e.line, "unknown key '" + k + "' in [" + kind + "]");
}

IniSection* IniDocument::section(const std::string& kind) {
  for (auto& s : sections)
    if (s.kind == kind) return &s;
  return nullptr;
}

std::vector<IniSection*> IniDocument::sections_of(const std::string& kind) {
  std::vector<IniSection*> out;
  for (auto& s : sections)
    if (s.kind == kind) out.push_back(&s);
  return out;
}

IniDocument parse_ini(std::istream& in, const std::string& origin) {
  IniDocument doc;
  doc.origin = origin;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find_first_of("#;");
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail_at(origin, lineno, "unterminated section header");
      const std::string header = trim(text.substr(1, text.size() - 2));
      if (header.empty()) fail_at(origin, lineno, "empty section header");
      IniSection sec;
      const auto sp = header.find_first_of(" \t");
      sec.kind = lower(header.substr(0, sp));
      sec.name = sp == std::string::npos ? "" : trim(header.substr(sp));
      sec.line = lineno;
      doc.sections.push_back(std::move(sec));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail_at(origin, lineno, "expected 'key = value'");
    if (doc.sections.empty()) fail_at(origin, lineno, "key outside of any section");
    const std::string key = lower(trim(text.substr(0, eq)));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) fail_at(origin, lineno, "missing key");
    IniSection& sec = doc.sections.back();
    if (sec.has(key)) fail_at(origin, lineno, "duplicate key '" + key + "'");
    sec.entries.push_back({key, {value, lineno, false}});
  }
  return doc;
}

std::string to_string(CaseKind k) {
  switch (k) {
    case CaseKind::SpherePecHarmonic: return "sphere_pec_harmonic";
    case CaseKind::EllipsoidPecHarmonic: return "ellipsoid_pec_harmonic";
    case CaseKind::SphereDielectricHarmonic: return "sphere_dielectric_harmonic";
    case CaseKind::CavityCubeTransient: return "cavity_cube_transient";
    case CaseKind::SpherePecTransient: return "sphere_pec_transient";
    case CaseKind::SphereDielectricTransient: return "sphere_dielectric_transient";
  }
  return "?";
}

CaseKind case_kind_from_string(const std::string& s) {
  for (CaseKind k : {CaseKind::SpherePecHarmonic, CaseKind::EllipsoidPecHarmonic, CaseKind::SphereDielectricHarmonic,
                     CaseKind::CavityCubeTransient, CaseKind::SpherePecTransient,
                     CaseKind::SphereDielectricTransient})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown case kind '" + s + "'");
}

bool is_transient(CaseKind k) {
  return k == CaseKind::CavityCubeTransient || k == CaseKind::SpherePecTransient ||
         k == CaseKind::SphereDielectricTransient;
}

std::string to_string(DomainMode m) {
  switch (m) {
    case DomainMode::Full: return "full";
    case DomainMode::SymmetricHalf: return "symmetric_half";
    case DomainMode::SymmetricQuarter: return "symmetric_quarter";
  }
  return "?";
}

DomainMode domain_mode_from_string(const std::string& s) {
  for (DomainMode m : {DomainMode::Full, DomainMode::SymmetricHalf, DomainMode::SymmetricQuarter})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown domain mode '" + s + "'");
}

std::array<int, 3> CaseConfig::element_divisions() const {
  if (convention == DivisionConvention::Elements) return divisions;
  return {divisions[0] / 2, divisions[1] / 2, divisions[2] / 2};
}

double CaseConfig::effective_patch_thickness() const {
  if (patch_thickness >= 0.0) return patch_thickness;
  const double scale = kind == CaseKind::CavityCubeTransient ? lengths.minCoeff() : a;
  return 0.01 * scale;
}

double CaseConfig::speed_of_light() const { return c_override.value_or(PhysicalConstants::codata().c); }

void CaseConfig::validate() const {
  const bool transient = is_transient(kind);
  const bool cavity = kind == CaseKind::CavityCubeTransient;
  const bool dielectric = kind == CaseKind::SphereDielectricHarmonic || kind == CaseKind::SphereDielectricTransient;
  const bool pec_exterior = kind == CaseKind::SpherePecHarmonic || kind == CaseKind::EllipsoidPecHarmonic;

  if (cavity && domain == DomainMode::SymmetricHalf)
    throw ConfigError("the cavity case supports full and symmetric_quarter domains");
  if (!cavity && domain == DomainMode::SymmetricQuarter)
    throw ConfigError("symmetric_quarter is only defined for the cavity case");
  if (domain != DomainMode::Full && symmetry == SymmetryTreatment::Patch && !(effective_patch_thickness() > 0.0))
    throw ConfigError("symmetric domains need a patch thickness > 0");

  for (int d : divisions)
    if (d < 1) throw ConfigError("mesh divisions must be positive");
  if (convention == DivisionConvention::Intervals)
    for (int d : divisions)
      if (d % 2) throw ConfigError("interval counts must be even (two per quadratic element)");
  const auto div = element_divisions();
  if (!cavity && div[1] < 2) throw ConfigError("at least two theta divisions are needed");
  if (!cavity && div[2] < (domain == DomainMode::Full ? 3 : 2)) throw ConfigError("too few phi divisions");

  if (formulation == Formulation::Amplitude && !pec_exterior)
    throw ConfigError("the amplitude formulation is limited to exterior PEC scattering cases");
  if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
  if (quad_order < 2 || quad_order > 5) throw ConfigError("quad_order must lie in [2, 5]");
  if (c_override && !(*c_override > 0.0)) throw ConfigError("c must be positive");

  if (cavity) {
    if ((lengths.array() <= 0.0).any()) throw ConfigError("cavity lengths must be positive");
  } else {
    if (!(a > 0.0)) throw ConfigError("a must be positive");
    const double inner = kind == CaseKind::EllipsoidPecHarmonic ? std::max(a, c_axis) : a;
    if (kind == CaseKind::EllipsoidPecHarmonic && !(c_axis > 0.0)) throw ConfigError("c_axis must be positive");
    if (!(R_inf > inner)) throw ConfigError("R_inf must exceed the scatterer");
  }
  if (dielectric) {
    if (n_inside < 1 || n_inside >= div[0])
      throw ConfigError("n_inside must leave at least one radial element on each side of the interface");
    if (!(eps_r > 0.0)) throw ConfigError("eps_r must be positive");
    if (mu_r != 1.0) throw ConfigError("magnetic scatterers (mu_r != 1) are not supported");
  }
  if (!transient) {
    if (!(k0 > 0.0)) throw ConfigError("k0 must be positive");
  } else {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (t_end < 0.0) throw ConfigError("t_end must be non-negative");
  }
  const bool has_wave = !cavity;
  if (has_wave && domain == DomainMode::SymmetricHalf) {
    const Vec3 d = transient ? pulse.k_hat : direction;
    const Vec3 p = transient ? pulse.E_hat : polarization;
    if (std::abs(d.y()) > 1e-12 || std::abs(p.y()) > 1e-12)
      throw ConfigError("a half domain about y = 0 needs an incident wave with no y components");
  }
  if (transient && !cavity) pulse.validate();
  if (!transient) HarmonicWaveSpec::from_k0(k0, E0, direction, polarization, PhysicalConstants::codata()).validate();

  for (const auto& p : probes) {
    const bool sweep = p.type != ProbeConfig::Type::Point;
    if (sweep == transient)
      throw ConfigError("probe '" + p.name + "': " + (transient ? "transient cases take point probes"
                                                                 : "harmonic cases take phi or theta sweeps"));
    if (sweep) {
      if (p.sweep.samples < 1) throw ConfigError("probe '" + p.name + "': samples must be positive");
      if (p.sweep.r > R_inf) throw ConfigError("probe '" + p.name + "': radius beyond R_inf");
    } else if (p.point.direction.norm() == 0.0) {
      throw ConfigError("probe '" + p.name + "': zero direction");
    }
    if (p.oracle) {
      if (kind == CaseKind::EllipsoidPecHarmonic || kind == CaseKind::SpherePecTransient ||
          kind == CaseKind::SphereDielectricTransient)
        throw ConfigError("probe '" + p.name + "': no closed-form reference exists for this case");
      if (!cavity && ((direction - Vec3::UnitZ()).norm() > 1e-12 || (polarization - Vec3::UnitX()).norm() > 1e-12))
        throw ConfigError("probe '" + p.name + "': the series references assume a z-travelling, x-polarized wave");
      if (kind == CaseKind::SpherePecHarmonic && p.sweep.r < a)
        throw ConfigError("probe '" + p.name + "': radius inside the conductor");
    }
  }
}

namespace {

ProbeConfig parse_probe(IniSection& s, const std::string& origin) {
  ProbeConfig p;
  p.name = s.name;
  if (p.name.empty()) fail_at(origin, s.line, "probe sections need a name, as in [probe near]");
  for (char ch : p.name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'))
      fail_at(origin, s.line, "probe names may contain letters, digits, '_' and '-' only");
  const std::string type = lower(s.take_string("type", "point"));
  if (type == "phi_sweep") {
    p.type = ProbeConfig::Type::PhiSweep;
  } else if (type == "theta_sweep") {
    p.type = ProbeConfig::Type::ThetaSweep;
  } else if (type == "point") {
    p.type = ProbeConfig::Type::Point;
  } else {
    fail_at(origin, s.line, "unknown probe type '" + type + "'");
  }
  if (p.type == ProbeConfig::Type::Point) {
    p.point.label = p.name;
    p.point.x = s.take_vec3("x", Vec3::Zero());
    p.point.direction = s.take_vec3("direction", Vec3::UnitX());
    const std::string q = lower(s.take_string("quantity", "e"));
    if (q == "e") {
      p.point.quantity = ProbeSpec::Quantity::E;
    } else if (q == "de_dt") {
      p.point.quantity = ProbeSpec::Quantity::dE_dt;
    } else if (q == "e_dot_t") {
      p.point.quantity = ProbeSpec::Quantity::E_dot_t;
    } else {
      fail_at(origin, s.line, "unknown quantity '" + q + "' (E, dE_dt or E_dot_t)");
    }
    p.point.total_field = s.take_bool("total_field", false);
  } else {
    p.sweep.variable = p.type == ProbeConfig::Type::PhiSweep ? SphericalSweep::Variable::Phi
                                                             : SphericalSweep::Variable::Theta;
    p.sweep.r = s.take_double("r", 1.0);
    p.sweep.fixed = s.take_double("fixed", 0.0);
    p.sweep.from = s.take_double("from", 0.0);
    p.sweep.to = s.take_double("to", 0.0);
    p.sweep.samples = s.take_int("samples", 1);
  }
  p.oracle = s.take_bool("oracle", false);
  if (s.has("tolerance")) p.tolerance = s.take_double("tolerance", 0.0);
  s.reject_unused(origin);
  return p;
}

}  // namespace

CaseConfig parse_case_config(std::istream& in, const std::string& origin) {
  IniDocument doc = parse_ini(in, origin);
  static const std::vector<std::string> known = {"case",  "geometry", "mesh", "physics", "wave",
                                                 "pulse", "time",     "solver", "probe"};
  for (const auto& s : doc.sections) {
    if (std::find(known.begin(), known.end(), s.kind) == known.end())
      fail_at(origin, s.line, "unknown section [" + s.kind + "]");
    if (s.kind != "probe" && !s.name.empty()) fail_at(origin, s.line, "only probe sections carry a name");
    if (s.kind != "probe" && doc.sections_of(s.kind).size() > 1)
      fail_at(origin, s.line, "section [" + s.kind + "] appears twice");
  }

  auto wrap = [&](IniSection& s, auto&& body) {
    try {
      body(s);
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind(origin + ":", 0) == 0) throw;
      throw ConfigError(origin + ": [" + s.kind + "] " + what);
    }
    s.reject_unused(origin);
  };

  CaseConfig cfg;
  IniSection* cs = doc.section("case");
  if (!cs) throw ConfigError(origin + ": missing [case] section");
  wrap(*cs, [&](IniSection& s) {
    const auto kind = s.take("kind");
    if (!kind) fail_at(origin, s.line, "[case] needs a kind");
    cfg.kind = case_kind_from_string(lower(*kind));
    cfg.name = s.take_string("name", to_string(cfg.kind));
    cfg.domain = domain_mode_from_string(lower(s.take_string("domain", "full")));
  });

  if (cfg.kind == CaseKind::CavityCubeTransient) {
    cfg.c_override = 3e8;
    cfg.divisions = {4, 4, 4};
  }
  if (cfg.kind == CaseKind::SpherePecTransient || cfg.kind == CaseKind::SphereDielectricTransient) {
    cfg.pulse.t0 = 25.99e-9;
    cfg.pulse.tau = 5.25e-9;
    cfg.pulse.r0 = Vec3(0.0, 0.0, -1.2);
    cfg.dt = 5e-10;
    cfg.t_end = 4.5e-8;
  }

  if (auto* s = doc.section("geometry"))
    wrap(*s, [&](IniSection& g) {
      cfg.a = g.take_double("a", cfg.a);
      cfg.c_axis = g.take_double("c_axis", cfg.c_axis);
      cfg.R_inf = g.take_double("r_inf", cfg.R_inf);
      cfg.lengths = g.take_vec3("lengths", cfg.lengths);
    });
  if (auto* s = doc.section("mesh"))
    wrap(*s, [&](IniSection& m) {
      cfg.divisions = m.take_int3("divisions", cfg.divisions);
      const std::string conv = lower(m.take_string("convention", "elements"));
      if (conv == "elements") {
        cfg.convention = DivisionConvention::Elements;
      } else if (conv == "intervals") {
        cfg.convention = DivisionConvention::Intervals;
      } else {
        throw ConfigError("convention must be 'elements' or 'intervals'");
      }
      cfg.n_inside = m.take_int("n_inside", cfg.n_inside);
      if (m.has("patch_thickness")) cfg.patch_thickness = std::max(0.0, m.take_double("patch_thickness", 0.0));
      const std::string sym = lower(m.take_string("symmetry", "patch"));
      if (sym == "patch") {
        cfg.symmetry = SymmetryTreatment::Patch;
      } else if (sym == "direct") {
        cfg.symmetry = SymmetryTreatment::Direct;
      } else {
        throw ConfigError("symmetry must be 'patch' or 'direct'");
      }
      cfg.psi_on_patch_outer_face = m.take_bool("psi_on_patch_outer_face", cfg.psi_on_patch_outer_face);
    });
  if (auto* s = doc.section("physics"))
    wrap(*s, [&](IniSection& p) {
      cfg.formulation = formulation_from_string(lower(p.take_string("formulation", to_string(cfg.formulation))));
      cfg.alpha = p.take_double("alpha", cfg.alpha);
      cfg.quad_order = p.take_int("quad_order", cfg.quad_order);
      cfg.eps_r = p.take_double("eps_r", cfg.eps_r);
      cfg.mu_r = p.take_double("mu_r", cfg.mu_r);
      if (p.has("c")) cfg.c_override = p.take_double("c", 0.0);
    });
  if (auto* s = doc.section("wave"))
    wrap(*s, [&](IniSection& w) {
      cfg.k0 = w.take_double("k0", cfg.k0);
      cfg.E0 = w.take_double("e0", cfg.E0);
      cfg.direction = w.take_vec3("direction", cfg.direction);
      cfg.polarization = w.take_vec3("polarization", cfg.polarization);
    });
  if (auto* s = doc.section("pulse"))
    wrap(*s, [&](IniSection& p) {
      cfg.pulse.t0 = p.take_double("t0", cfg.pulse.t0);
      cfg.pulse.tau = p.take_double("tau", cfg.pulse.tau);
      cfg.pulse.r0 = p.take_vec3("r0", cfg.pulse.r0);
      cfg.pulse.k_hat = p.take_vec3("direction", cfg.pulse.k_hat);
      cfg.pulse.E_hat = p.take_vec3("polarization", cfg.pulse.E_hat);
    });
  if (auto* s = doc.section("time"))
    wrap(*s, [&](IniSection& t) {
      cfg.dt = t.take_double("dt", cfg.dt);
      cfg.t_end = t.take_double("t_end", cfg.t_end);
      cfg.omega = t.take_double("omega", cfg.omega);
    });
  if (auto* s = doc.section("solver"))
    wrap(*s, [&](IniSection& v) {
      const std::string method = lower(v.take_string("method", "direct"));
      if (method == "direct") {
        cfg.solver.method = SolverMethod::Direct;
      } else if (method == "iterative") {
        cfg.solver.method = SolverMethod::Iterative;
      } else {
        throw ConfigError("method must be 'direct' or 'iterative'");
      }
      cfg.solver.tolerance = v.take_double("tolerance", cfg.solver.tolerance);
      cfg.solver.max_iterations = v.take_int("max_iterations", cfg.solver.max_iterations);
      cfg.solver.ilut_drop = v.take_double("ilut_drop", cfg.solver.ilut_drop);
      cfg.solver.ilut_fill = v.take_int("ilut_fill", cfg.solver.ilut_fill);
    });
  for (IniSection* s : doc.sections_of("probe")) {
    try {
      cfg.probes.push_back(parse_probe(*s, origin));
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind(origin + ":", 0) == 0) throw;
      throw ConfigError(origin + ": [probe " + s->name + "] " + what);
    }
    for (std::size_t i = 0; i + 1 < cfg.probes.size(); ++i)
      if (cfg.probes[i].name == cfg.probes.back().name) fail_at(origin, s->line, "duplicate probe name");
  }
  cfg.pulse.c = cfg.speed_of_light();
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

CaseConfig load_case_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_case_config(in, path.string());
}

}  // namespace sympatch
