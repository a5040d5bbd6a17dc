#include "torusendo/errors.hpp"
#include "torusendo/types.hpp"

#include <algorithm>

namespace torusendo {

LiftPoint LiftPoint::from_plane(const Vec2& x) {
  LiftPoint p;
  for (int i = 0; i < 2; ++i) {
    double fl = std::floor(x[i]);
    double fr = x[i] - fl;
    if (fr >= 1.0) {
      fr = 0.0;
      fl += 1.0;
    }
    p.cell[i] = static_cast<LiftInt>(fl);
    p.frac[i] = fr;
  }
  return p;
}

Vec2 LiftPoint::to_plane() const {
  return {static_cast<double>(cell[0]) + frac[0], static_cast<double>(cell[1]) + frac[1]};
}

Vec2 difference(const LiftPoint& a, const LiftPoint& b) {
  Vec2 d;
  for (int i = 0; i < 2; ++i) {
    d[i] = static_cast<double>(a.cell[i] - b.cell[i]) + (a.frac[i] - b.frac[i]);
  }
  return d;
}

LiftInt checked_add(LiftInt a, LiftInt b) {
  LiftInt r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("lift translation overflow");
  return r;
}

LiftInt checked_mul(LiftInt a, LiftInt b) {
  LiftInt r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("lift translation overflow");
  return r;
}

std::string to_string(LiftInt v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  // Work with negative values so the minimum is representable.
  std::string out;
  LiftInt t = neg ? v : -v;
  while (t != 0) {
    int digit = static_cast<int>(-(t % 10));
    out.push_back(static_cast<char>('0' + digit));
    t /= 10;
  }
  if (neg) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace torusendo
