#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sympatch/compare.hpp"
#include "sympatch/config.hpp"

namespace sympatch {

struct CaseMesh {
  Mesh mesh;
  std::vector<PatchPlane> planes;  // symmetry planes carrying a thin patch
};

/// Generates the mesh of the solved domain, patches included.
CaseMesh build_case_mesh(const CaseConfig& cfg);

HarmonicProblem harmonic_problem(const CaseConfig& cfg, const std::vector<PatchPlane>& planes);
TransientSetup transient_setup(const CaseConfig& cfg, const std::vector<PatchPlane>& planes);

/// Closed-form field along a sweep: scattered field outside the body, and inside a dielectric
/// the total minus the incident field, matching the scattered-field unknowns.
ProbeLine oracle_line(const CaseConfig& cfg, const ProbeConfig& probe);
/// Closed-form cavity series at the given times.
ProbeSeries oracle_series(const CaseConfig& cfg, const ProbeConfig& probe, const std::vector<double>& times);

struct ProbeResult {
  ProbeConfig config;
  std::optional<ProbeLine> line, oracle_line;
  std::optional<ProbeSeries> series, oracle_series;
  std::optional<CompareMetrics> metrics;  // against the oracle
  bool within_tolerance() const;
};

struct RunReport {
  std::string case_name;
  CaseKind kind = CaseKind::SpherePecHarmonic;
  DomainMode domain = DomainMode::Full;
  int node_count = 0;
  int element_count = 0;
  int equation_count = 0;
  double wall_seconds = 0.0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  std::optional<double> residual;  // relative residual of the harmonic solve
  int steps = 0;
  std::optional<double> energy_initial, energy_final;
  std::vector<std::string> outputs;

  std::string to_json(const std::vector<ProbeResult>& probes) const;
};

struct CaseRun {
  RunReport report;
  std::vector<ProbeResult> probes;
  bool within_tolerance() const;
};

/// Builds, solves and probes a case. With an output directory, writes one CSV per probe (and per
/// oracle) plus report.json there.
CaseRun run_case(const CaseConfig& cfg, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Writes the oracle CSV of every probe that names one; returns the paths.
std::vector<std::string> write_oracles(const CaseConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace sympatch
