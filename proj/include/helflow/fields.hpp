#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

namespace helflow {

// Scalar field sampled on the (u,v) chart grid: (i,j) -> f(u_i, v_j).
using Field = Eigen::ArrayXXd;
// Componentwise R^3-valued field.
using Vec3Field = std::array<Field, 3>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline Field dot(const Vec3Field& a, const Vec3Field& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3Field cross(const Vec3Field& a, const Vec3Field& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline Vec3Field scale(const Field& s, const Vec3Field& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

inline Vec3Field add(const Vec3Field& a, const Vec3Field& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec3Field sub(const Vec3Field& a, const Vec3Field& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace helflow
