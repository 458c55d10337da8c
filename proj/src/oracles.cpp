#include "sympatch/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace sympatch {

SphericalBessel spherical_bessel(int nmax, double x, bool with_y) {
  if (!(x > 0.0)) throw DomainError("spherical Bessel functions need x > 0");
  if (nmax < 1) nmax = 1;
  SphericalBessel out;
  out.j.assign(nmax + 1, 0.0);
  out.y.assign(nmax + 1, 0.0);

  // Downward recurrence from well above both nmax and x, rescaled against overflow.
  const int start = nmax + int(std::sqrt(40.0 * (nmax + x))) + 20 + int(x);
  std::vector<double> t(start + 2, 0.0);
  t[start] = 1e-300;
  for (int n = start; n > 0; --n) {
    t[n - 1] = (2 * n + 1) / x * t[n] - t[n + 1];
    if (std::abs(t[n - 1]) > 1e250)
      for (int k = n - 1; k <= start; ++k) t[k] *= 1e-250;
  }
  std::copy(t.begin(), t.begin() + nmax + 1, out.j.begin());
  const double j0 = std::sin(x) / x, j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const double scale = std::abs(j0) > std::abs(j1) ? j0 / out.j[0] : j1 / out.j[1];
  for (double& v : out.j) v *= scale;
  if (!with_y) {
    // Without y_n the closed-form j_0 and j_1 still pin down the normalization.
    const double other = std::abs(j0) > std::abs(j1) ? out.j[1] - j1 : out.j[0] - j0;
    if (!(std::abs(other) <= 1e-10 * (std::abs(j0) + std::abs(j1))))
      throw SolverError("spherical Bessel recurrence lost accuracy at x = " + std::to_string(x));
    out.y.clear();
    return out;
  }

  out.y[0] = -std::cos(x) / x;
  out.y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int n = 1; n < nmax; ++n) out.y[n + 1] = (2 * n + 1) / x * out.y[n] - out.y[n - 1];

  for (int n = 1; n <= nmax; ++n) {
    const double w = (out.j[n] * out.y[n - 1] - out.j[n - 1] * out.y[n]) * x * x;
    if (!(std::abs(w - 1.0) <= 1e-8))
      throw SolverError("spherical Bessel recurrence lost accuracy at order " + std::to_string(n) + ", x = " +
                        std::to_string(x));
  }
  return out;
}

namespace {

struct Radial {
  // z_n(rho), z_n(rho)/rho and [rho z_n(rho)]'/rho for n = 1..N (index 0 unused)
  std::vector<cplx> z, z_over_rho, dz_over_rho;
};

Radial radial_terms(int N, double rho, bool hankel) {
  Radial r;
  r.z.assign(N + 1, 0.0);
  r.z_over_rho.assign(N + 1, 0.0);
  r.dz_over_rho.assign(N + 1, 0.0);
  if (rho < 1e-8) {
    // Regular functions at the origin: only n = 1 survives in z/rho and [rho z]'/rho.
    if (hankel) throw DomainError("outgoing series evaluated at the origin");
    r.z_over_rho[1] = 1.0 / 3.0;
    r.dz_over_rho[1] = 2.0 / 3.0;
    return r;
  }
  const auto sb = spherical_bessel(N, rho, hankel);
  for (int n = 1; n <= N; ++n) {
    const cplx zn = hankel ? cplx(sb.j[n], sb.y[n]) : cplx(sb.j[n]);
    const cplx zm = hankel ? cplx(sb.j[n - 1], sb.y[n - 1]) : cplx(sb.j[n - 1]);
    r.z[n] = zn;
    r.z_over_rho[n] = zn / rho;
    r.dz_over_rho[n] = zm - double(n) * zn / rho;  // [rho z_n]' = rho z_{n-1} - n z_n
  }
  return r;
}

// Angular functions pi_n = P_n^1 / sin(theta) and tau_n = dP_n^1 / dtheta for n = 0..N.
void angular(int N, double theta, std::vector<double>& pi, std::vector<double>& tau) {
  const double mu = std::cos(theta);
  pi.assign(N + 1, 0.0);
  tau.assign(N + 1, 0.0);
  if (N >= 1) pi[1] = 1.0;
  for (int n = 2; n <= N; ++n) pi[n] = (2.0 * n - 1.0) / (n - 1.0) * mu * pi[n - 1] - double(n) / (n - 1.0) * pi[n - 2];
  for (int n = 1; n <= N; ++n) tau[n] = n * mu * pi[n] - (n + 1.0) * pi[n - 1];
}

// Coefficients multiplying M_o1n and N_e1n in one expansion (exp(-i omega t) convention).
struct Coefficients {
  std::vector<cplx> m, n;
};

// Sums sum_n E_n (cM_n M_o1n + cN_n N_e1n) in spherical components and returns Cartesian,
// stopping once two consecutive terms fall below the tail tolerance.
CVec3 sum_series(const Coefficients& c, const Radial& rad, int N, double E0, const SphericalPoint& x,
                 double tol) {
  std::vector<double> pi, tau;
  angular(N, x.theta, pi, tau);
  const double cp = std::cos(x.phi), sp = std::sin(x.phi), st = std::sin(x.theta);
  cplx Er = 0.0, Et = 0.0, Ep = 0.0;
  int quiet = 0;
  cplx in_pow = 1.0;
  for (int n = 1; n <= N; ++n) {
    in_pow *= cplx(0.0, 1.0);
    const cplx En = in_pow * E0 * (2.0 * n + 1.0) / (n * (n + 1.0));
    const cplx a = En * c.m[n], b = En * c.n[n];
    // M_o1n = cos(phi) pi z e_theta - sin(phi) tau z e_phi
    // N_e1n = cos(phi) n(n+1) sin(theta) pi z/rho e_r + cos(phi) tau [rho z]'/rho e_theta
    //         - sin(phi) pi [rho z]'/rho e_phi
    const cplx dr = b * cp * double(n * (n + 1)) * st * pi[n] * rad.z_over_rho[n];
    const cplx dt = a * cp * pi[n] * rad.z[n] + b * cp * tau[n] * rad.dz_over_rho[n];
    const cplx dp = -a * sp * tau[n] * rad.z[n] - b * sp * pi[n] * rad.dz_over_rho[n];
    Er += dr;
    Et += dt;
    Ep += dp;
    const double term = std::sqrt(std::norm(dr) + std::norm(dt) + std::norm(dp));
    const double total = std::sqrt(std::norm(Er) + std::norm(Et) + std::norm(Ep));
    quiet = term <= tol * total || term == 0.0 ? quiet + 1 : 0;
    if (quiet >= 2 && n >= 3) break;
    if (n == N) {
      if (term > 1e3 * tol * std::max(total, 1e-300) && term > 1e-300)
        throw SolverError("series did not converge within " + std::to_string(N) + " terms");
    }
  }
  const SphericalBasis e = spherical_basis(x.theta, x.phi);
  return e.er.cast<cplx>() * Er + e.etheta.cast<cplx>() * Et + e.ephi.cast<cplx>() * Ep;
}

int term_count(const SeriesControl& ctrl, double ka) {
  return ctrl.max_terms > 0 ? ctrl.max_terms : int(std::ceil(ka)) + 20;
}

// Fields are computed for exp(-i omega t) and exp(+ikz) incidence, then conjugated, which
// maps them onto exp(+i omega t) with exp(-ikz) incidence for real parameters.
CVec3 to_engineering(const CVec3& v) { return v.conjugate(); }

}  // namespace

CVec3 mie_pec_sphere(double k0, double a, double E0, const SphericalPoint& x, const SeriesControl& ctrl) {
  if (!(k0 > 0.0) || !(a > 0.0)) throw DomainError("Mie series needs k0 > 0 and a > 0");
  if (x.r < a * (1.0 - 1e-12)) throw DomainError("Mie PEC series evaluated inside the sphere");
  const int N = term_count(ctrl, k0 * a);
  const double ka = k0 * a;
  const auto sa = spherical_bessel(N, ka);
  Coefficients c;
  c.m.assign(N + 1, 0.0);
  c.n.assign(N + 1, 0.0);
  for (int n = 1; n <= N; ++n) {
    const cplx h(sa.j[n], sa.y[n]), hm(sa.j[n - 1], sa.y[n - 1]);
    const double dj = ka * sa.j[n - 1] - n * sa.j[n];  // [x j_n]'
    const cplx dh = ka * hm - double(n) * h;
    const cplx an = dj / dh, bn = sa.j[n] / h;
    // scattered: E_n (i a_n N_e1n - b_n M_o1n)
    c.m[n] = -bn;
    c.n[n] = cplx(0.0, 1.0) * an;
  }
  const Radial rad = radial_terms(N, k0 * x.r, true);
  return to_engineering(sum_series(c, rad, N, E0, x, ctrl.tail_tolerance));
}

CVec3 stratton_dielectric_sphere(double k0, double a, double eps1_r, double mu1_r, double E0, const SphericalPoint& x,
                                 const SeriesControl& ctrl) {
  if (!(k0 > 0.0) || !(a > 0.0) || !(eps1_r > 0.0) || !(mu1_r > 0.0))
    throw DomainError("dielectric sphere series needs positive parameters");
  const double m = std::sqrt(eps1_r * mu1_r);
  const double ka = k0 * a, mka = m * ka;
  const int N = term_count(ctrl, std::max(ka, mka));
  const auto s = spherical_bessel(N, ka);
  const auto s1 = spherical_bessel(N, mka, false);
  const double mu = 1.0, mu1 = mu1_r;
  Coefficients c;
  c.m.assign(N + 1, 0.0);
  c.n.assign(N + 1, 0.0);
  const bool inside = x.r < a;
  for (int n = 1; n <= N; ++n) {
    const double jx = s.j[n], jmx = s1.j[n];
    const cplx hx(s.j[n], s.y[n]);
    const double djx = ka * s.j[n - 1] - n * s.j[n];
    const double djmx = mka * s1.j[n - 1] - n * s1.j[n];
    const cplx dhx = ka * cplx(s.j[n - 1], s.y[n - 1]) - double(n) * hx;
    const cplx den_a = mu * m * m * jmx * dhx - mu1 * hx * djmx;
    const cplx den_b = mu1 * jmx * dhx - mu * hx * djmx;
    if (inside) {
      const cplx cn = (mu1 * jx * dhx - mu1 * hx * djx) / den_b;
      const cplx dn = (mu1 * m * jx * dhx - mu1 * m * hx * djx) / den_a;
      // internal: E_n (c_n M_o1n - i d_n N_e1n)
      c.m[n] = cn;
      c.n[n] = cplx(0.0, -1.0) * dn;
    } else {
      const cplx an = (mu * m * m * jmx * djx - mu1 * jx * djmx) / den_a;
      const cplx bn = (mu1 * jmx * djx - mu * jx * djmx) / den_b;
      c.m[n] = -bn;
      c.n[n] = cplx(0.0, 1.0) * an;
    }
  }
  const Radial rad = inside ? radial_terms(N, mka * x.r / a, false) : radial_terms(N, k0 * x.r, true);
  return to_engineering(sum_series(c, rad, N, E0, x, ctrl.tail_tolerance));
}

CavityFields cavity_fields(const Vec3& x, double t, double omega, double eps, double mu) {
  const double sx = std::sin(x.x()), cx = std::cos(x.x());
  const double sy = std::sin(x.y()), cy = std::cos(x.y());
  const double sz = std::sin(x.z()), cz = std::cos(x.z());
  const double cm = std::cos(omega * t) - std::sin(omega * t);
  const double cpl = std::cos(omega * t) + std::sin(omega * t);
  const double w2 = eps * mu * omega * omega;
  CavityFields f;
  f.E = Vec3(2 * cx * sy * sz * cm, -sx * cy * sz * cm, -sx * sy * cz * cm);
  f.H = Vec3(0.0, -3.0 / (mu * omega) * cx * sy * cz * cpl, 3.0 / (mu * omega) * cx * cy * sz * cpl);
  f.A = Vec3(-2.0 / omega * cx * sy * sz * cpl, 1.0 / omega * sx * cy * sz * cpl, 1.0 / omega * sx * sy * cz * cpl);
  const Vec3 shape((2 * w2 - 6) / (mu * omega) * cx * sy * sz, (3 - w2) / (mu * omega) * sx * cy * sz,
                   (3 - w2) / (mu * omega) * sx * sy * cz);
  f.j = shape * cpl;
  f.dj_dt = shape * (omega * cm);  // d/dt (cos + sin) = omega (cos - sin)
  f.psi = 0.0;
  return f;
}

void write_field_csv(std::ostream& out, const std::vector<double>& coords, const std::vector<CVec3>& fields) {
  if (coords.size() != fields.size()) throw DomainError("coordinate and field counts differ");
  out << "coord,ReEx,ImEx,ReEy,ImEy,ReEz,ImEz\n" << std::setprecision(12);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    out << coords[i];
    for (int c = 0; c < 3; ++c) out << ',' << fields[i][c].real() << ',' << fields[i][c].imag();
    out << '\n';
  }
}

}  // namespace sympatch
