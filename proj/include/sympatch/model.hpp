#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

namespace sympatch {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;

/// Vacuum constants. The speed of light is derived from eps0 and mu0.
struct PhysicalConstants {
  double eps0;
  double mu0;
  double c;

  /// CODATA 2018 values.
  static PhysicalConstants codata();
  /// Keeps mu0 and adjusts eps0 so that 1/sqrt(eps0*mu0) equals `c`.
  static PhysicalConstants with_speed_of_light(double c);
};

/// Linear, isotropic, lossless material given by relative parameters.
class Material {
 public:
  Material() = default;
  Material(double eps_r, double mu_r);

  double eps_r() const { return eps_r_; }
  double mu_r() const { return mu_r_; }
  double eps(const PhysicalConstants& pc) const { return eps_r_ * pc.eps0; }
  double mu(const PhysicalConstants& pc) const { return mu_r_ * pc.mu0; }
  /// Relative refractive index sqrt(eps_r * mu_r).
  double index() const;

 private:
  double eps_r_ = 1.0;
  double mu_r_ = 1.0;
};

/// Time-harmonic plane wave E0 * exp(-i k0 khat.x) * pol, with exp(+i omega t) time dependence.
struct HarmonicWaveSpec {
  double omega = 0.0;
  double k0 = 0.0;
  double E0 = 1.0;
  Vec3 propagation_axis = Vec3::UnitZ();
  Vec3 polarization = Vec3::UnitX();

  static HarmonicWaveSpec from_k0(double k0, double E0, const Vec3& axis, const Vec3& pol,
                                  const PhysicalConstants& pc);
  void validate() const;
  /// Wavenumber inside a medium.
  double k(const Material& m) const { return k0 * m.index(); }
};

CVec3 plane_wave_field(const HarmonicWaveSpec& spec, const Vec3& x);

/// Differentiated Gaussian pulse 2u exp(-u^2/tau^2) Ehat, u = t - t0 - khat.(x - r0)/c.
struct NeumannPulseSpec {
  double t0 = 0.0;
  Vec3 r0 = Vec3::Zero();
  double tau = 1.0;
  Vec3 k_hat = Vec3::UnitZ();
  Vec3 E_hat = Vec3::UnitX();
  double c = 299792458.0;

  void validate() const;
  double retarded_time(double t, const Vec3& x) const { return t - t0 - k_hat.dot(x - r0) / c; }
};

struct PulseSample {
  Vec3 E;
  Vec3 dE_dt;
};

PulseSample neumann_pulse(const NeumannPulseSpec& spec, double t, const Vec3& x);

/// Vector potential of the incident pulse in the gauge psi = 0, so that E = -dA/dt.
Vec3 neumann_pulse_potential(const NeumannPulseSpec& spec, double t, const Vec3& x);

struct SphericalPoint {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

/// phi is reported in [0, 2pi); on the polar axis phi = 0.
SphericalPoint to_spherical(const Vec3& x);
Vec3 to_cartesian(const SphericalPoint& p);

/// Unit vectors (e_r, e_theta, e_phi) at a spherical location.
struct SphericalBasis {
  Vec3 er, etheta, ephi;
};
SphericalBasis spherical_basis(double theta, double phi);

}  // namespace sympatch
