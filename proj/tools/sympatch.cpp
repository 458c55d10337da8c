// Command-line front end: mesh, solve, oracle, compare, inspect.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>

#include "sympatch/cases.hpp"

using namespace sympatch;

namespace {

enum Exit { kOk = 0, kTolerance = 1, kUsage = 2, kNumerical = 3 };

void print_counts(const Mesh& m) {
  std::cout << "nodes " << m.nodes.size() << "\n"
            << "elements " << m.elements.size() << " (B27 " << m.count(ElementKind::B27) << ", W18 "
            << m.count(ElementKind::W18) << ")\n";
}

int cmd_mesh(const std::string& cfg_path, const std::string& out) {
  const CaseConfig cfg = load_case_config(cfg_path);
  const CaseMesh cm = build_case_mesh(cfg);
  save_mesh(cm.mesh, out);
  print_counts(cm.mesh);
  std::cout << "wrote " << out << "\n";
  return kOk;
}

int cmd_solve(const std::string& cfg_path, std::string out, bool quiet) {
  const CaseConfig cfg = load_case_config(cfg_path);
  if (out.empty()) out = "out/" + cfg.name;
  const CaseRun run = run_case(cfg, out);
  const RunReport& r = run.report;
  if (!quiet) {
    std::cout << "case " << r.case_name << " (" << to_string(r.kind) << ", " << to_string(r.domain) << ")\n"
              << "elements " << r.element_count << ", nodes " << r.node_count << ", equations " << r.equation_count
              << "\n"
              << std::setprecision(4) << "wall time " << r.wall_seconds << " s\n";
    if (r.residual) std::cout << "relative residual " << *r.residual << "\n";
    if (r.energy_final)
      std::cout << "steps " << r.steps << ", energy " << *r.energy_initial << " -> " << *r.energy_final << "\n";
    for (const auto& p : run.probes) {
      std::cout << "probe " << p.config.name;
      if (p.metrics)
        std::cout << ": Linf/peak " << p.metrics->linf_rel_peak << ", L2 rel " << p.metrics->l2_rel
                  << (p.within_tolerance() ? "" : "  [over tolerance]");
      std::cout << "\n";
    }
    std::cout << "outputs in " << out << "\n";
  }
  return run.within_tolerance() ? kOk : kTolerance;
}

int cmd_oracle(const std::string& cfg_path, const std::string& out) {
  const CaseConfig cfg = load_case_config(cfg_path);
  const auto files = write_oracles(cfg, out.empty() ? "out/" + cfg.name : out);
  if (files.empty()) std::cout << "no probe in " << cfg_path << " asks for an oracle\n";
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  return kOk;
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  return line;
}

int cmd_compare(const std::string& ref_path, const std::string& test_path, double tol, const std::string& metric) {
  const std::string head = first_line(ref_path);
  if (head != first_line(test_path).substr(0, head.size())) throw FormatError("the two files have different schemas");
  CompareMetrics m;
  if (head.rfind("time_s,value", 0) == 0) {
    std::ifstream a(ref_path), b(test_path);
    m = compare_series(read_series_csv(a), read_series_csv(b));
  } else {
    std::ifstream a(ref_path), b(test_path);
    m = compare_lines(read_probe_csv(a), read_probe_csv(b));
  }
  std::cout << std::setprecision(6) << "samples " << m.samples << "\npeak " << m.peak << "\nlinf_rel_peak "
            << m.linf_rel_peak << "\nl2_rel " << m.l2_rel << "\n";
  const double value = metric == "l2" ? m.l2_rel : m.linf_rel_peak;
  if (tol >= 0.0 && value > tol) {
    std::cout << metric << " " << value << " exceeds tolerance " << tol << "\n";
    return kTolerance;
  }
  return kOk;
}

int cmd_inspect(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw FormatError("cannot open " + path);
  if (probe.peek() == std::ifstream::traits_type::eof()) throw FormatError(path + ": empty file");
  const Mesh m = load_mesh(path);
  print_counts(m);
  std::map<std::string, int> tags;
  for (const auto& f : m.facets) ++tags[to_string(f.tag)];
  std::cout << "boundary tags";
  for (const auto& [t, n] : tags) std::cout << " " << t << "(" << n << ")";
  std::cout << "\n";
  std::set<int> regions;
  for (const auto& e : m.elements) regions.insert(e.region);
  std::cout << "regions";
  for (int r : regions) std::cout << " " << r;
  std::cout << "\n";
  for (const auto& [name, nodes] : m.node_sets) std::cout << "node set " << name << " (" << nodes.size() << ")\n";
  for (const auto& [name, els] : m.element_sets) std::cout << "element set " << name << " (" << els.size() << ")\n";
  const MeshValidation v = validate_mesh(m);
  std::cout << "min Jacobian " << v.min_detJ << "\ninterior faces " << v.interior_faces << ", boundary faces "
            << v.boundary_faces << "\n";
  for (const auto& p : v.problems) std::cout << "problem: " << p << "\n";
  std::cout << (v.ok ? "valid" : "INVALID") << "\n";
  return v.ok ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nodal finite element Maxwell solver with thin-patch symmetry planes"};
  app.require_subcommand(1);

  std::string cfg_path, out_path, ref_path, test_path, mesh_path, metric = "linf";
  double tol = -1.0;
  bool quiet = false;

  auto* mesh = app.add_subcommand("mesh", "generate the mesh of a case and write it to a file");
  mesh->add_option("config", cfg_path, "case config file")->required()->check(CLI::ExistingFile);
  mesh->add_option("-o,--output", out_path, "mesh file to write")->required();

  auto* solve = app.add_subcommand("solve", "run a case; writes probe CSVs and report.json");
  solve->add_option("config", cfg_path, "case config file")->required()->check(CLI::ExistingFile);
  solve->add_option("-o,--out", out_path, "output directory (default out/<case name>)");
  solve->add_flag("-q,--quiet", quiet, "print nothing on success");

  auto* oracle = app.add_subcommand("oracle", "write closed-form references for the probes of a case");
  oracle->add_option("config", cfg_path, "case config file")->required()->check(CLI::ExistingFile);
  oracle->add_option("-o,--out", out_path, "output directory (default out/<case name>)");

  auto* compare = app.add_subcommand("compare", "error metrics of a probe CSV against a reference CSV");
  compare->add_option("reference", ref_path, "reference CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("test", test_path, "CSV to score")->required()->check(CLI::ExistingFile);
  compare->add_option("-t,--tolerance", tol, "exit 1 when the chosen metric exceeds this");
  compare->add_option("-m,--metric", metric, "metric gated by --tolerance")
      ->check(CLI::IsMember({"linf", "l2"}));

  auto* inspect = app.add_subcommand("inspect", "summarize and validate a mesh file");
  inspect->add_option("mesh", mesh_path, "mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*mesh) return cmd_mesh(cfg_path, out_path);
    if (*solve) return cmd_solve(cfg_path, out_path, quiet);
    if (*oracle) return cmd_oracle(cfg_path, out_path);
    if (*compare) return cmd_compare(ref_path, test_path, tol, metric);
    if (*inspect) return cmd_inspect(mesh_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kUsage;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
