#include "sympatch/model.hpp"

#include <cmath>

#include "sympatch/errors.hpp"

namespace sympatch {

PhysicalConstants PhysicalConstants::codata() {
  constexpr double eps0 = 8.8541878128e-12;
  constexpr double mu0 = 4.0e-7 * std::numbers::pi;
  return {eps0, mu0, 1.0 / std::sqrt(eps0 * mu0)};
}

PhysicalConstants PhysicalConstants::with_speed_of_light(double c) {
  if (!(c > 0.0)) throw DomainError("speed of light must be positive");
  const double mu0 = 4.0e-7 * std::numbers::pi;
  return {1.0 / (mu0 * c * c), mu0, c};
}

Material::Material(double eps_r, double mu_r) : eps_r_(eps_r), mu_r_(mu_r) {
  if (!(eps_r > 0.0) || !(mu_r > 0.0))
    throw DomainError("relative permittivity and permeability must be positive");
}

double Material::index() const { return std::sqrt(eps_r_ * mu_r_); }

HarmonicWaveSpec HarmonicWaveSpec::from_k0(double k0, double E0, const Vec3& axis, const Vec3& pol,
                                           const PhysicalConstants& pc) {
  HarmonicWaveSpec s;
  s.k0 = k0;
  s.omega = k0 * pc.c;
  s.E0 = E0;
  s.propagation_axis = axis.normalized();
  s.polarization = pol.normalized();
  s.validate();
  return s;
}

void HarmonicWaveSpec::validate() const {
  if (!(k0 >= 0.0)) throw DomainError("k0 must be non-negative");
  if (std::abs(propagation_axis.norm() - 1.0) > 1e-12 || std::abs(polarization.norm() - 1.0) > 1e-12)
    throw DomainError("propagation axis and polarization must be unit vectors");
  if (std::abs(propagation_axis.dot(polarization)) > 1e-12)
    throw DomainError("polarization must be orthogonal to the propagation axis");
}

CVec3 plane_wave_field(const HarmonicWaveSpec& spec, const Vec3& x) {
  const cplx phase = std::exp(cplx(0.0, -spec.k0 * spec.propagation_axis.dot(x)));
  return (spec.E0 * phase) * spec.polarization.cast<cplx>();
}

void NeumannPulseSpec::validate() const {
  if (!(tau > 0.0)) throw DomainError("pulse width tau must be positive");
  if (!(c > 0.0)) throw DomainError("wave speed must be positive");
  if (std::abs(k_hat.norm() - 1.0) > 1e-12 || std::abs(E_hat.norm() - 1.0) > 1e-12)
    throw DomainError("pulse direction vectors must be unit vectors");
  if (std::abs(k_hat.dot(E_hat)) > 1e-12) throw DomainError("pulse polarization must be orthogonal to k_hat");
}

PulseSample neumann_pulse(const NeumannPulseSpec& spec, double t, const Vec3& x) {
  const double u = spec.retarded_time(t, x);
  const double s = u / spec.tau;
  const double g = std::exp(-s * s);
  return {2.0 * u * g * spec.E_hat, 2.0 * (1.0 - 2.0 * s * s) * g * spec.E_hat};
}

Vec3 neumann_pulse_potential(const NeumannPulseSpec& spec, double t, const Vec3& x) {
  const double s = spec.retarded_time(t, x) / spec.tau;
  return spec.tau * spec.tau * std::exp(-s * s) * spec.E_hat;
}

SphericalPoint to_spherical(const Vec3& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("to_spherical: zero vector has no direction");
  const double rho = std::hypot(x.x(), x.y());
  SphericalPoint p;
  p.r = r;
  p.theta = std::atan2(rho, x.z());
  if (rho == 0.0) {
    p.phi = 0.0;
  } else {
    p.phi = std::atan2(x.y(), x.x());
    if (p.phi < 0.0) p.phi += 2.0 * std::numbers::pi;
  }
  return p;
}

Vec3 to_cartesian(const SphericalPoint& p) {
  const double st = std::sin(p.theta);
  return {p.r * st * std::cos(p.phi), p.r * st * std::sin(p.phi), p.r * std::cos(p.theta)};
}

SphericalBasis spherical_basis(double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  return {Vec3(st * cp, st * sp, ct), Vec3(ct * cp, ct * sp, -st), Vec3(-sp, cp, 0.0)};
}

}  // namespace sympatch
