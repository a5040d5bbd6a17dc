#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace torusendo {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;
using IntVec2 = Vector2<std::int64_t>;
using IntMat2 = Matrix2<std::int64_t>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Fractional part in [0, 1). Exact for finite doubles.
inline double wrap_unit(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

/// Representative of a torus point in [0,1)^2.
inline Vec2 wrap_unit(const Vec2& x) { return {wrap_unit(x[0]), wrap_unit(x[1])}; }

/// Distance on the torus with the max norm.
inline double torus_distance(const Vec2& a, const Vec2& b) {
  double d = 0.0;
  for (int i = 0; i < 2; ++i) {
    double t = std::abs(wrap_unit(a[i] - b[i]));
    d = std::max(d, std::min(t, 1.0 - t));
  }
  return d;
}

/// Unit representative of a projective direction: the larger component is positive.
inline Vec2 canonical_direction(Vec2 v) {
  const double n = v.norm();
  if (n == 0.0) return Vec2::UnitX();
  v /= n;
  const int main = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
  if (v[main] < 0) v = -v;
  return v + Vec2::Zero();  // turns -0 into +0
}

/// Angle in [0, pi/2] between the lines spanned by a and b.
inline double projective_angle(const Vec2& a, const Vec2& b) {
  return std::atan2(std::abs(a[0] * b[1] - a[1] * b[0]), std::abs(a.dot(b)));
}

/// Integer type for lift translations. 5^54 still fits.
using LiftInt = __int128;

/// A point of the plane stored as an integer translation plus a fractional part in [0,1)^2,
/// so that high iterates of a lift keep full precision in the fractional part.
struct LiftPoint {
  std::array<LiftInt, 2> cell{0, 0};
  Vec2 frac = Vec2::Zero();

  static LiftPoint from_plane(const Vec2& x);
  Vec2 to_plane() const;
};

/// a - b as a plane vector.
Vec2 difference(const LiftPoint& a, const LiftPoint& b);

LiftInt checked_add(LiftInt a, LiftInt b);
LiftInt checked_mul(LiftInt a, LiftInt b);

std::string to_string(LiftInt v);

}  // namespace torusendo
