#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>

#include "sympatch/elements.hpp"
#include "sympatch/errors.hpp"

using namespace sympatch;

namespace {

std::mt19937 rng(42);

Vec3 random_reference_point(ElementKind kind) {
  std::uniform_real_distribution<double> u(-1, 1), v(0, 1);
  if (kind == ElementKind::B27) return Vec3(u(rng), u(rng), u(rng));
  double a = v(rng), b = v(rng);
  if (a + b > 1) a = 1 - a, b = 1 - b;
  return Vec3(a, b, u(rng));
}

ElementGeometry identity_geometry(ElementKind kind) {
  return {kind, reference_element(kind).node_local_coords, 0};
}

// A smoothly distorted element: reference coordinates pushed through a mild nonlinear map.
ElementGeometry warped_geometry(ElementKind kind) {
  ElementGeometry g = identity_geometry(kind);
  for (auto& x : g.nodes)
    x = Vec3(1.3 * x.x() + 0.1 * x.y() * x.y(), 0.9 * x.y() + 0.05 * x.x() * x.z(), 1.1 * x.z() + 0.08 * x.x());
  return g;
}

double quadratic(const Vec3& x) {
  return 0.3 + x.x() - 2 * x.y() + 0.5 * x.z() + x.x() * x.x() - 0.7 * x.y() * x.z() + 1.2 * x.z() * x.z() +
         0.4 * x.x() * x.y();
}

}  // namespace

TEST_CASE("Kronecker property and partition of unity") {
  for (auto kind : {ElementKind::B27, ElementKind::W18}) {
    const auto& ref = reference_element(kind);
    REQUIRE(ref.node_count == node_count(kind));
    for (int k = 0; k < ref.node_count; ++k) {
      const auto v = shape_values(kind, ref.node_local_coords[k]);
      for (int i = 0; i < ref.node_count; ++i) CHECK(v[i] == doctest::Approx(i == k ? 1.0 : 0.0).epsilon(1e-14));
    }
    for (int n = 0; n < 50; ++n) {
      const Vec3 xi = random_reference_point(kind);
      double sum = 0;
      for (double s : shape_values(kind, xi)) sum += s;
      CHECK(std::abs(sum - 1.0) <= 1e-13);
      Vec3 gs = Vec3::Zero();
      for (const auto& g : shape_gradients(kind, xi)) gs += g;
      CHECK(gs.norm() <= 1e-12);
    }
  }
  const auto c = shape_values(ElementKind::B27, Vec3::Zero());
  CHECK(c[26] == doctest::Approx(1.0));
}

TEST_CASE("node ordering groups") {
  const auto& hex = reference_element(ElementKind::B27).node_local_coords;
  auto zeros = [](const Vec3& p) { return int(p.x() == 0) + int(p.y() == 0) + int(p.z() == 0); };
  for (int i = 0; i < 8; ++i) CHECK(zeros(hex[i]) == 0);
  for (int i = 8; i < 20; ++i) CHECK(zeros(hex[i]) == 1);
  for (int i = 20; i < 26; ++i) CHECK(zeros(hex[i]) == 2);
  CHECK(zeros(hex[26]) == 3);
  CHECK((hex[0] - Vec3(-1, -1, -1)).norm() == 0.0);
  CHECK((hex[1] - Vec3(1, -1, -1)).norm() == 0.0);
}

TEST_CASE("gradients match finite differences") {
  const double h = 1e-5;
  for (auto kind : {ElementKind::B27, ElementKind::W18}) {
    for (int n = 0; n < 10; ++n) {
      const Vec3 xi = random_reference_point(kind);
      const auto g = shape_gradients(kind, xi);
      for (int d = 0; d < 3; ++d) {
        const auto p = shape_values(kind, xi + h * Vec3::Unit(d));
        const auto m = shape_values(kind, xi - h * Vec3::Unit(d));
        for (int i = 0; i < node_count(kind); ++i) CHECK(std::abs((p[i] - m[i]) / (2 * h) - g[i][d]) <= 1e-7);
      }
    }
  }
}

TEST_CASE("quadratic completeness") {
  for (auto kind : {ElementKind::B27, ElementKind::W18}) {
    const auto& ref = reference_element(kind);
    for (int n = 0; n < 50; ++n) {
      const Vec3 xi = random_reference_point(kind);
      const auto v = shape_values(kind, xi);
      const auto g = shape_gradients(kind, xi);
      double f = 0;
      Vec3 df = Vec3::Zero();
      for (int i = 0; i < ref.node_count; ++i) {
        f += v[i] * quadratic(ref.node_local_coords[i]);
        df += g[i] * ref.node_local_coords[i].x();
      }
      CHECK(std::abs(f - quadratic(xi)) <= 1e-10);
      CHECK((df - Vec3::UnitX()).norm() <= 1e-12);
    }
  }
}

TEST_CASE("quadrature weights and exactness") {
  CHECK_THROWS_AS(quadrature(ElementKind::B27, 1), DomainError);
  CHECK_THROWS_AS(quadrature(ElementKind::W18, 5), DomainError);
  for (int order = 2; order <= 4; ++order) {
    double sh = 0, sw = 0;
    for (double w : quadrature(ElementKind::B27, order).weights) sh += w;
    for (double w : quadrature(ElementKind::W18, order).weights) sw += w;
    CHECK(sh == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(sw == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto& q3 = quadrature(ElementKind::B27, 3);
  CHECK(q3.points.size() == 27);
  // Monomials up to degree 5 per axis; 1D reference moments from boost's Gauss rule.
  auto moment = [](int p) {
    return boost::math::quadrature::gauss<double, 10>::integrate([p](double t) { return std::pow(t, p); }, -1.0, 1.0);
  };
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b)
      for (int c = 0; c <= 5; ++c) {
        double s = 0;
        for (std::size_t q = 0; q < q3.points.size(); ++q) {
          const Vec3& p = q3.points[q];
          s += q3.weights[q] * std::pow(p.x(), a) * std::pow(p.y(), b) * std::pow(p.z(), c);
        }
        const double exact = moment(a) * moment(b) * moment(c);
        CHECK(std::abs(s - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
      }
  double s222 = 0;
  for (std::size_t q = 0; q < q3.points.size(); ++q)
    s222 += q3.weights[q] * q3.points[q].cwiseProduct(q3.points[q]).prod();
  CHECK(s222 == doctest::Approx(8.0 / 27.0).epsilon(1e-14));
  // Triangle rules: x^a y^b over the unit triangle equals a! b! / (a + b + 2)!.
  const int degree[] = {2, 4, 5};
  for (int order = 2; order <= 4; ++order) {
    const auto& rule = quadrature(ElementKind::W18, order);
    for (int a = 0; a <= degree[order - 2]; ++a)
      for (int b = 0; a + b <= degree[order - 2]; ++b) {
        double s = 0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
          s += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
        const double exact = 2.0 * std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
        CHECK(s == doctest::Approx(exact).epsilon(1e-12));
      }
  }
}

TEST_CASE("gauss legendre against boost") {
  for (int n = 1; n <= 6; ++n) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    double s = 0;
    for (int i = 0; i < n; ++i) s += w[i] * std::cos(x[i]);
    if (n >= 5) CHECK(s == doctest::Approx(2 * std::sin(1.0)).epsilon(1e-9));
    for (int i = 1; i < n; ++i) CHECK(x[i] > x[i - 1]);
  }
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  const auto& ab = boost::math::quadrature::gauss<double, 5>::abscissa();
  CHECK(x[2] == doctest::Approx(0.0));
  CHECK(x[4] == doctest::Approx(ab[2]).epsilon(1e-15));
}

TEST_CASE("isoparametric mapping") {
  const auto id = identity_geometry(ElementKind::B27);
  const auto mp = map_physical(id, Vec3(0.2, -0.3, 0.5));
  CHECK((mp.J - Mat3::Identity()).norm() <= 1e-13);
  CHECK(mp.detJ == doctest::Approx(1.0));
  ElementGeometry scaled = id;
  for (auto& x : scaled.nodes) x *= 2.5;
  CHECK(map_physical(scaled, Vec3(0.1, 0.1, 0.1)).detJ == doctest::Approx(2.5 * 2.5 * 2.5));

  ElementGeometry flipped = id;
  flipped.id = 17;
  for (auto& x : flipped.nodes) x.z() = -x.z();
  try {
    map_physical(flipped, Vec3::Zero());
    FAIL("expected a degenerate element error");
  } catch (const DegenerateElementError& e) {
    CHECK(e.element() == 17);
  }

  const Vec3 a(0.3, -1.2, 2.0);
  for (auto kind : {ElementKind::B27, ElementKind::W18}) {
    const auto g = warped_geometry(kind);
    const auto& tab = tabulate(kind, 3);
    const int n = tab.nodes;
    std::vector<Vec3> grads(n);
    for (std::size_t q = 0; q < tab.rule->points.size(); ++q) {
      Vec3 x;
      Mat3 J;
      double det;
      map_physical(g, std::span(tab.values).subspan(q * n, n), std::span(tab.ref_grads).subspan(q * n, n), x, J, det,
                   grads);
      CHECK(det > 0);
      Vec3 ga = Vec3::Zero();
      for (int i = 0; i < n; ++i) ga += grads[i] * a.dot(g.nodes[i]);
      CHECK((ga - a).norm() <= 1e-9 * a.norm());
    }
  }
}

TEST_CASE("spherical shell sector volume") {
  // One B27 element covering r in [1, 1.5], theta in [pi/3, pi/2], phi in [0, pi/6].
  const double r0 = 1, r1 = 1.5, t0 = std::numbers::pi / 3, t1 = std::numbers::pi / 2, p1 = std::numbers::pi / 6;
  ElementGeometry g = identity_geometry(ElementKind::B27);
  for (auto& x : g.nodes) {
    const double r = r0 + (x.x() + 1) / 2 * (r1 - r0), th = t0 + (x.y() + 1) / 2 * (t1 - t0), ph = (x.z() + 1) / 2 * p1;
    x = r * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
  }
  double vol = 0;
  const auto& rule = quadrature(ElementKind::B27, 3);
  for (std::size_t q = 0; q < rule.points.size(); ++q) vol += rule.weights[q] * map_physical(g, rule.points[q]).detJ;
  const double exact = (r1 * r1 * r1 - r0 * r0 * r0) / 3 * (std::cos(t0) - std::cos(t1)) * p1;
  CHECK(std::abs(vol - exact) <= 0.005 * exact);
}

TEST_CASE("faces") {
  for (auto kind : {ElementKind::B27, ElementKind::W18}) {
    const auto g = identity_geometry(kind);
    double total_flux_area = 0;
    Vec3 normal_integral = Vec3::Zero();
    for (int f = 0; f < face_count(kind); ++f) {
      const auto& nodes = face_nodes(kind, f);
      CHECK(nodes.size() == (face_is_triangle(kind, f) ? 6u : 9u));
      CHECK(face_corners(kind, f).size() == (face_is_triangle(kind, f) ? 3u : 4u));
      // Face nodes lie on the face: shape functions of off-face nodes vanish on it.
      const auto& fq = face_quadrature(kind, f, 3);
      for (std::size_t q = 0; q < fq.points.size(); ++q) {
        const Vec3 xi = face_to_reference(kind, f, fq.points[q][0], fq.points[q][1]);
        const auto v = shape_values(kind, xi);
        double on = 0;
        for (int i : nodes) on += v[i];
        CHECK(on == doctest::Approx(1.0).epsilon(1e-13));
        const auto fp = map_face(g, f, fq.points[q][0], fq.points[q][1]);
        CHECK((fp.normal - face_reference_normal(kind, f)).norm() <= 1e-13);
        total_flux_area += fq.weights[q] * fp.dA;
        normal_integral += fq.weights[q] * fp.dA * fp.normal;
      }
    }
    // Closed surface: the integrated normal vanishes.
    CHECK(normal_integral.norm() <= 1e-13);
    const double expected = kind == ElementKind::B27 ? 24.0 : 1.0 + 2.0 + 2.0 + 2.0 * std::sqrt(2.0);
    CHECK(total_flux_area == doctest::Approx(expected).epsilon(1e-13));
  }
}
