#pragma once

#include <iosfwd>
#include <vector>

#include "sympatch/errors.hpp"
#include "sympatch/model.hpp"

namespace sympatch {

/// Spherical Bessel functions j_n(x), y_n(x) for n = 0..nmax at real x > 0.
/// j_n comes from a normalized downward recurrence, y_n from the upward one; the cross
/// Wronskian is checked for every order and a SolverError is thrown when it fails.
/// With `with_y` false only j_n is returned (y_n overflows for small x and high order).
struct SphericalBessel {
  std::vector<double> j, y;
};
SphericalBessel spherical_bessel(int nmax, double x, bool with_y = true);

struct SeriesControl {
  int max_terms = 0;            // 0 selects ceil(k a) + 20
  double tail_tolerance = 1e-12;
};

/// Scattered field of the plane wave E0 exp(-i k0 z) x_hat (time factor exp(+i omega t)) by a
/// perfectly conducting sphere of radius a centred at the origin. Requires r >= a.
CVec3 mie_pec_sphere(double k0, double a, double E0, const SphericalPoint& x, const SeriesControl& ctrl = {});

/// Same wave on a homogeneous sphere with relative parameters (eps1_r, mu1_r) in vacuum.
/// Returns the total field inside (r < a) and the scattered field outside.
CVec3 stratton_dielectric_sphere(double k0, double a, double eps1_r, double mu1_r, double E0, const SphericalPoint& x,
                                 const SeriesControl& ctrl = {});

/// Closed-form cavity mode in [0, pi]^3 driven by a volume current. `eps` and `mu` are absolute.
struct CavityFields {
  Vec3 E, H, A, j, dj_dt;
  double psi = 0.0;
};
CavityFields cavity_fields(const Vec3& x, double t, double omega, double eps, double mu);

/// Writes `coord,ReEx,ImEx,ReEy,ImEy,ReEz,ImEz` rows for an oracle evaluated along a sweep.
void write_field_csv(std::ostream& out, const std::vector<double>& coords, const std::vector<CVec3>& fields);

}  // namespace sympatch
