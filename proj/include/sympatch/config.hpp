#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sympatch/assembly.hpp"
#include "sympatch/harmonic.hpp"
#include "sympatch/transient.hpp"

namespace sympatch {

/// `key = value` lines grouped under `[section]` or `[section name]` headers. `#` and `;`
/// start comments. Keys are looked up through `take_*`, which marks them consumed so that
/// leftovers can be reported as unknown.
class IniSection {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };

  std::string kind;  // text before the first space of the header
  std::string name;  // remainder of the header, may be empty
  int line = 0;
  std::vector<std::pair<std::string, Entry>> entries;

  bool has(const std::string& key) const;
  std::optional<std::string> take(const std::string& key);
  std::string take_string(const std::string& key, const std::string& fallback);
  double take_double(const std::string& key, double fallback);
  int take_int(const std::string& key, int fallback);
  bool take_bool(const std::string& key, bool fallback);
  Vec3 take_vec3(const std::string& key, const Vec3& fallback);
  std::array<int, 3> take_int3(const std::string& key, const std::array<int, 3>& fallback);
  /// Throws ConfigError naming the first key that was never taken.
  void reject_unused(const std::string& origin) const;

 private:
  Entry* find(const std::string& key);
};

struct IniDocument {
  std::string origin;
  std::vector<IniSection> sections;

  /// First section of the given kind, or nullptr.
  IniSection* section(const std::string& kind);
  std::vector<IniSection*> sections_of(const std::string& kind);
};

IniDocument parse_ini(std::istream& in, const std::string& origin);

/// A number, `pi`, or a product/quotient of them such as `pi/4` or `2*pi`.
double parse_number(const std::string& text);

enum class CaseKind {
  SpherePecHarmonic,
  EllipsoidPecHarmonic,
  SphereDielectricHarmonic,
  CavityCubeTransient,
  SpherePecTransient,
  SphereDielectricTransient,
};
std::string to_string(CaseKind k);
CaseKind case_kind_from_string(const std::string& s);
bool is_transient(CaseKind k);

enum class DomainMode { Full, SymmetricHalf, SymmetricQuarter };
std::string to_string(DomainMode m);
DomainMode domain_mode_from_string(const std::string& s);

/// How a symmetry plane is closed: the thin patch (A.n = 0 on its outer face, psi = 0 in its
/// volume) or A.n = 0 imposed directly on the plane with psi free.
enum class SymmetryTreatment { Patch, Direct };

/// `Intervals` counts quadratic node intervals (twice the element count) per direction.
enum class DivisionConvention { Elements, Intervals };

struct ProbeConfig {
  std::string name;
  enum class Type { PhiSweep, ThetaSweep, Point } type = Type::Point;
  SphericalSweep sweep;  // sweeps
  ProbeSpec point;       // transient points
  bool oracle = false;   // write and score the closed-form reference
  std::optional<double> tolerance;  // Linf error / peak allowed against the oracle
};

struct CaseConfig {
  std::string name = "case";
  CaseKind kind = CaseKind::SpherePecHarmonic;
  DomainMode domain = DomainMode::Full;

  // geometry
  double a = 1.0;        // sphere radius or ellipsoid x/y semi-axis
  double c_axis = 0.25;  // ellipsoid z semi-axis
  double R_inf = 5.0;
  Vec3 lengths{std::numbers::pi, std::numbers::pi, std::numbers::pi};  // full cavity box

  // mesh, for the solved part of the domain
  std::array<int, 3> divisions{8, 6, 6};
  DivisionConvention convention = DivisionConvention::Elements;
  int n_inside = 0;  // radial elements inside a dielectric sphere (included in divisions[0])
  double patch_thickness = -1.0;  // < 0 selects 1% of the characteristic length
  SymmetryTreatment symmetry = SymmetryTreatment::Patch;

  // physics
  Formulation formulation = Formulation::Conventional;
  double alpha = 1.0;
  int quad_order = 3;
  double k0 = 1.0, E0 = 1.0;
  Vec3 direction = Vec3::UnitZ();
  Vec3 polarization = Vec3::UnitX();
  double eps_r = 1.0, mu_r = 1.0;
  bool psi_on_patch_outer_face = true;
  std::optional<double> c_override;

  // transient
  double dt = 1e-9;
  double t_end = 4e-8;
  double omega = 3e8;
  NeumannPulseSpec pulse;

  SolverOptions solver;
  std::vector<ProbeConfig> probes;

  /// Element counts along the three generator directions.
  std::array<int, 3> element_divisions() const;
  double effective_patch_thickness() const;
  double speed_of_light() const;
  /// Invariants across sections. Throws ConfigError.
  void validate() const;
};

CaseConfig parse_case_config(std::istream& in, const std::string& origin);
CaseConfig load_case_config(const std::filesystem::path& path);

}  // namespace sympatch
