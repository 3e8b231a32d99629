#pragma once

#include <cmath>
#include <string>

#include "helflow/errors.hpp"
#include "helflow/fields.hpp"

namespace helflow {

enum class SurfaceKind { Sphere, Torus };

inline std::string to_string(SurfaceKind k) {
  return k == SurfaceKind::Sphere ? "sphere" : "torus";
}

// Analytic closed reference surface.
//   sphere: u = polar angle in (0,pi), v = azimuth in [0,2pi)
//   torus : u = major angle, v = minor angle, both in [0,2pi)
// Normals point outward; with k_ab = <d2X, nu> the unit sphere has
// k = -g and H = -2 (sum of principal curvatures), K = +1.
struct ReferenceSurface {
  SurfaceKind kind = SurfaceKind::Sphere;
  double radius = 1.0;            // sphere
  double major = 2.0, minor = 0.5;  // torus

  // Normal injectivity radius: R for the sphere, the tube radius for the torus.
  double reach() const { return kind == SurfaceKind::Sphere ? radius : minor; }
};

inline ReferenceSurface make_sphere(double radius) {
  if (!(radius > 0.0))
    throw DomainError("sphere radius must be positive, got " +
                      std::to_string(radius));
  ReferenceSurface s;
  s.kind = SurfaceKind::Sphere;
  s.radius = radius;
  return s;
}

inline ReferenceSurface make_torus(double major, double minor) {
  if (!(minor > 0.0) || !(major > minor))
    throw DomainError("torus radii must satisfy major > minor > 0, got major=" +
                      std::to_string(major) + " minor=" + std::to_string(minor));
  ReferenceSurface s;
  s.kind = SurfaceKind::Torus;
  s.major = major;
  s.minor = minor;
  return s;
}

// Closed-form reference quantities used by tests and oracles.
inline double sphere_area(double R) { return 4.0 * kPi * R * R; }
inline double sphere_volume(double R) { return 4.0 * kPi * R * R * R / 3.0; }
inline double torus_area(double a, double r) { return 4.0 * kPi * kPi * a * r; }
inline double torus_volume(double a, double r) {
  return 2.0 * kPi * kPi * a * r * r;
}
// Bending energy (kappa/2) * int (H - c0)^2 dA of the round reference.
inline double sphere_energy(double R, double kappa, double c0) {
  const double h = -2.0 / R;
  return 0.5 * kappa * (h - c0) * (h - c0) * sphere_area(R);
}
inline double torus_energy_c00(double a, double r, double kappa) {
  return kappa * 2.0 * kPi * kPi * a * a / (r * std::sqrt(a * a - r * r));
}

}  // namespace helflow
