#include <doctest.h>

#include <numbers>
#include <sstream>

#include "sympatch/oracles.hpp"
#include "sympatch/transient.hpp"

using namespace sympatch;
using std::numbers::pi;

namespace {

constexpr double c_light = 3e8, omega = 3e8;
const double mu0 = 4e-7 * pi, eps0 = 1.0 / (mu0 * c_light * c_light);

TransientSetup cavity_setup(double dt, double source_scale = 1.0, bool initial = true) {
  TransientSetup s;
  s.params.c = c_light;
  s.dt = dt;
  if (source_scale != 0.0)
    s.source = [source_scale](const Vec3& x, double t, const Material&) {
      return Vec3(source_scale * mu0 * cavity_fields(x, t, omega, eps0, mu0).j);
    };
  if (initial)
    s.initial = [](const Vec3& x) {
      const auto f = cavity_fields(x, 0.0, omega, eps0, mu0);
      return std::make_pair(f.A, Vec3(-f.E));
    };
  return s;
}

std::shared_ptr<const Mesh> cube(int n) { return std::make_shared<Mesh>(gen_cuboid({pi, pi, pi}, {n, n, n})); }

const Vec3 probe(1.1780, 0.3926, 0.7853);

}  // namespace

TEST_CASE("initial cavity state") {
  const TransientSolver solver(cube(2), cavity_setup(1e-9));
  const auto s = solver.initial_state();
  const auto u = solver.nodal_u(s), w = solver.nodal_w(s);
  for (std::size_t n = 0; n < solver.mesh().nodes.size(); ++n) {
    const Vec3 x = solver.mesh().nodes[n];
    CHECK(u[4 * n + 3] == 0.0);
    CHECK(w[4 * n + 3] == 0.0);
    if (std::abs(x.x() - pi / 2) < 1e-12) CHECK(std::abs(u[4 * n]) < 1e-15);
    const auto f = cavity_fields(x, 0.0, omega, eps0, mu0);
    // Wall nodes keep only their normal component.
    const bool interior = x.minCoeff() > 1e-9 && x.maxCoeff() < pi - 1e-9;
    if (interior) CHECK((u.segment<3>(4 * n) - f.A).norm() < 1e-12 * f.A.norm() + 1e-20);
  }
}

TEST_CASE("zero state without sources stays zero") {
  const TransientSolver solver(cube(2), cavity_setup(1e-9, 0.0, false));
  auto s = solver.initial_state();
  for (int k = 0; k < 5; ++k) s = solver.step(s);
  CHECK(s.u.norm() == 0.0);
  CHECK(s.w.norm() == 0.0);
  CHECK(s.time == doctest::Approx(5e-9));
  CHECK(solver.energy(s) == 0.0);
}

TEST_CASE("response is linear in the source") {
  const TransientSolver one(cube(2), cavity_setup(1e-9, 1.0, false));
  const TransientSolver two(cube(2), cavity_setup(1e-9, 2.0, false));
  auto a = one.initial_state(), b = two.initial_state();
  for (int k = 0; k < 10; ++k) {
    a = one.step(a);
    b = two.step(b);
  }
  REQUIRE(a.u.norm() > 0.0);
  CHECK((b.u - 2.0 * a.u).norm() <= 1e-10 * b.u.norm());
  CHECK((b.w - 2.0 * a.w).norm() <= 1e-10 * b.w.norm());
}

TEST_CASE("energy is a quadratic form and is conserved without sources") {
  const auto mesh = cube(2);
  const double dt = 100.0 * cfl_estimate(*mesh, {}, c_light);
  const TransientSolver solver(mesh, cavity_setup(dt, 0.0, true));
  auto s = solver.initial_state();
  const double e0 = solver.energy(s);
  REQUIRE(e0 > 0.0);
  TransientState twice = s;
  twice.u *= 2.0;
  twice.w *= 2.0;
  CHECK(solver.energy(twice) == doctest::Approx(4.0 * e0).epsilon(1e-14));
  double drift = 0.0;
  for (int k = 0; k < 200; ++k) {
    s = solver.step(s);
    drift = std::max(drift, std::abs(solver.energy(s) - e0) / e0);
  }
  CHECK(drift < 1e-10);
}

TEST_CASE("cavity probe follows the analytic field") {
  const TransientSolver solver(cube(4), cavity_setup(1e-9));
  std::vector<ProbeSpec> probes;
  for (int k = 0; k < 3; ++k) probes.push_back({"E", probe, Vec3::Unit(k)});
  const auto series = run_transient(solver, 4e-8, probes);
  REQUIRE(series[0].times.size() == 41);
  for (int k = 0; k < 3; ++k) {
    double err = 0, peak = 0;
    for (std::size_t i = 0; i < series[k].times.size(); ++i) {
      const double ref = cavity_fields(probe, series[k].times[i], omega, eps0, mu0).E[k];
      err = std::max(err, std::abs(series[k].values[i] - ref));
      peak = std::max(peak, std::abs(ref));
    }
    CHECK(err < 0.05 * peak);
  }
}

TEST_CASE("time stepping is second order") {
  // A much finer step on the same mesh isolates the time error.
  auto series = [](double dt) {
    const TransientSolver solver(cube(2), cavity_setup(dt));
    const auto s = run_transient(solver, 1.6e-8, {{"Ex", probe, Vec3::UnitX()}})[0];
    const int stride = int(std::lround(2e-10 / dt));
    std::vector<double> v;
    for (std::size_t i = 0; i < s.values.size(); i += stride) v.push_back(s.values[i]);
    return v;
  };
  const auto ref = series(2.5e-11), a = series(2e-10), b = series(1e-10);
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    e1 = std::max(e1, std::abs(a[i] - ref[i]));
    e2 = std::max(e2, std::abs(b[i] - ref[i]));
  }
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("zero-length run returns the initial sample") {
  const TransientSolver solver(cube(2), cavity_setup(1e-9));
  const auto s = run_transient(solver, 0.0, {{"dEx", probe, Vec3::UnitX(), ProbeSpec::Quantity::dE_dt}});
  REQUIRE(s[0].times.size() == 1);
  CHECK(s[0].values[0] == 0.0);
  CHECK_THROWS_AS(run_transient(solver, -1.0, {}), ConfigError);
}

TEST_CASE("derivative probes difference the field samples") {
  const TransientSolver solver(cube(2), cavity_setup(1e-10));
  const auto s = run_transient(solver, 2e-9, {{"Ex", probe, Vec3::UnitX()},
                                              {"dEx", probe, Vec3::UnitX(), ProbeSpec::Quantity::dE_dt}});
  const auto& E = s[0].values;
  const auto& d = s[1].values;
  for (std::size_t k = 2; k < E.size(); ++k)
    CHECK(d[k] == doctest::Approx((3 * E[k] - 4 * E[k - 1] + E[k - 2]) / 2e-10));
}

TEST_CASE("configuration errors") {
  TransientSetup bad = cavity_setup(0.0);
  CHECK_THROWS_AS(TransientSolver(cube(2), bad), ConfigError);
  TransientSetup half = cavity_setup(1e-9);
  half.lift_A = [](const Vec3&, double) { return Vec3::Zero(); };
  CHECK_THROWS_AS(TransientSolver(cube(2), half), ConfigError);
  const TransientSolver solver(cube(2), cavity_setup(1e-9));
  CHECK_THROWS_AS(solver.E_at(solver.initial_state(), probe, true), ConfigError);
}

TEST_CASE("CFL estimate scales with the element size") {
  const double c1 = cfl_estimate(*cube(2), {}, c_light), c2 = cfl_estimate(*cube(4), {}, c_light);
  CHECK(c1 == doctest::Approx(2.0 * c2));
  MaterialTable slow{{Material(4.0, 1.0)}};
  CHECK(cfl_estimate(*cube(2), slow, c_light) == doctest::Approx(2.0 * c1));
}

TEST_CASE("series CSV") {
  ProbeSeries s;
  s.times = {0.0, 1e-9, 2e-9};
  s.values = {0.5, -1.25, 3e-7};
  std::stringstream ss;
  write_series_csv(ss, s);
  const auto back = read_series_csv(ss);
  CHECK(back.times == s.times);
  CHECK(back.values == s.values);
  std::stringstream back_in_time("time_s,value\n1,2\n0.5,3\n");
  CHECK_THROWS_WITH_AS(read_series_csv(back_in_time), doctest::Contains("line 3"), FormatError);
  std::stringstream junk("time_s,value\n1,x\n");
  CHECK_THROWS_AS(read_series_csv(junk), FormatError);
}
