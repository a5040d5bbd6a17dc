#include "torusendo/integer_linear.hpp"

#include "torusendo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace torusendo {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
  return r;
}

IntMat2 checked_product(const IntMat2& a, const IntMat2& b) {
  IntMat2 r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r(i, j) = checked_add(checked_mul(a(i, 0), b(0, j)), checked_mul(a(i, 1), b(1, j)));
    }
  }
  return r;
}

IntVec2 checked_product(const IntMat2& a, const IntVec2& v) {
  return {checked_add(checked_mul(a(0, 0), v[0]), checked_mul(a(0, 1), v[1])),
          checked_add(checked_mul(a(1, 0), v[0]), checked_mul(a(1, 1), v[1]))};
}

std::int64_t checked_det(const IntMat2& a) {
  return checked_sub(checked_mul(a(0, 0), a(1, 1)), checked_mul(a(0, 1), a(1, 0)));
}

std::int64_t checked_trace(const IntMat2& a) { return checked_add(a(0, 0), a(1, 1)); }

IntMat2 adjugate(const IntMat2& a) {
  IntMat2 r;
  r << a(1, 1), checked_mul(-1, a(0, 1)), checked_mul(-1, a(1, 0)), a(0, 0);
  return r;
}

IntMat2 unimodular_inverse(const IntMat2& p) {
  std::int64_t d = checked_det(p);
  if (d != 1 && d != -1) throw PreconditionViolated("matrix is not unimodular");
  IntMat2 adj = adjugate(p);
  return d == 1 ? adj : IntMat2(-adj);
}

bool is_lower_triangular(const IntMat2& a) { return a(0, 1) == 0; }

bool is_expanding(const IntMat2& a) {
  // Roots of t^2 - tau t + delta lie outside the closed unit disk iff |delta| > 1 and
  // p(1) > 0, p(-1) > 0 (delta > 0), resp. p(1) < 0, p(-1) < 0 (delta < 0).
  const __int128 delta = checked_det(a);
  const __int128 tau = checked_trace(a);
  const __int128 abs_tau = tau < 0 ? -tau : tau;
  if (delta > 1) return abs_tau < delta + 1;
  if (delta < -1) return abs_tau < -delta - 1;
  return false;
}

double spectral_radius(const IntMat2& a) {
  const long double tau = static_cast<long double>(a(0, 0) + a(1, 1));
  const long double delta = static_cast<long double>(checked_det(a));
  const long double disc = tau * tau - 4 * delta;
  if (disc < 0) return static_cast<double>(std::sqrt(std::abs(delta)));
  const long double s = std::sqrt(disc);
  return static_cast<double>(std::max(std::abs((tau + s) / 2), std::abs((tau - s) / 2)));
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool perfect_square(__int128 n, __int128& root) {
  if (n < 0) return false;
  auto r = static_cast<__int128>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  root = r;
  return r * r == n;
}

IntVec2 primitive(IntVec2 v) {
  std::int64_t g = std::gcd(v[0], v[1]);
  if (g == 0) throw PreconditionViolated("zero vector has no primitive representative");
  v /= g;
  if (v[0] < 0 || (v[0] == 0 && v[1] < 0)) v = -v;
  return v;
}

}  // namespace

std::optional<EigenData> integer_eigenvalues(const IntMat2& a) {
  const __int128 tau = checked_trace(a);
  const __int128 delta = checked_det(a);
  const __int128 disc = tau * tau - 4 * delta;
  __int128 s = 0;
  if (!perfect_square(disc, s)) return std::nullopt;
  // s and tau share parity because disc = tau^2 mod 4.
  auto r_plus = static_cast<std::int64_t>((tau + s) / 2);
  auto r_minus = static_cast<std::int64_t>((tau - s) / 2);

  EigenData e;
  auto abs_less = [](std::int64_t x, std::int64_t y) {
    return std::abs(x) < std::abs(y) || (std::abs(x) == std::abs(y) && x < y);
  };
  e.lambda1 = abs_less(r_plus, r_minus) ? r_minus : r_plus;
  e.lambda2 = e.lambda1 == r_plus ? r_minus : r_plus;

  const std::int64_t l = e.lambda2;
  const std::int64_t a11 = checked_sub(a(0, 0), l);
  const std::int64_t a22 = checked_sub(a(1, 1), l);
  IntVec2 v;
  if (a11 != 0 || a(0, 1) != 0) {
    v << checked_mul(-1, a(0, 1)), a11;
  } else if (a(1, 0) != 0 || a22 != 0) {
    v << checked_mul(-1, a22), a(1, 0);
  } else {
    v << 0, 1;  // A = lambda I
  }
  e.eigenvector = primitive(v);
  return e;
}

std::pair<std::int64_t, std::int64_t> bezout_minimal(std::int64_t a, std::int64_t b) {
  if (std::gcd(a, b) != 1) throw PreconditionViolated("bezout_minimal needs coprime arguments");
  if (b == 0) return {a, 0};  // a = +-1
  // Extended Euclid on (a, b).
  std::int64_t old_r = a, r = b, old_s = 1, s = 0;
  while (r != 0) {
    std::int64_t q = floor_div(old_r, r);
    std::int64_t t = checked_sub(old_r, checked_mul(q, r));
    old_r = r;
    r = t;
    t = checked_sub(old_s, checked_mul(q, s));
    old_s = s;
    s = t;
  }
  std::int64_t p0 = old_r == 1 ? old_s : -old_s;  // old_r = +-1
  const std::int64_t step = std::abs(b);
  std::int64_t rem = ((p0 % step) + step) % step;
  std::int64_t p = rem;
  if (rem != 0 && step - rem <= rem) p = rem - step;
  std::int64_t q = (1 - checked_mul(p, a)) / b;
  return {p, q};
}

CanonicalForm canonical_form(const IntMat2& a) {
  auto eig = integer_eigenvalues(a);
  if (!eig) throw NoIntegerEigenvalues("matrix has no integer eigenvalues");
  const IntVec2 v = eig->eigenvector;
  auto [p, q] = bezout_minimal(v[0], v[1]);
  IntMat2 pm;
  pm << q, v[0], checked_mul(-1, p), v[1];
  CanonicalForm out;
  out.change_of_basis = pm;
  out.triangular = checked_product(unimodular_inverse(pm), checked_product(a, pm));
  out.eigen = *eig;
  if (checked_det(pm) != 1 || !is_lower_triangular(out.triangular) ||
      out.triangular(0, 0) != eig->lambda1 || out.triangular(1, 1) != eig->lambda2) {
    throw Error("canonical_form verification failed");
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t floor_rational(const Rational& r) { return floor_div(r.numerator(), r.denominator()); }
std::int64_t ceil_rational(const Rational& r) { return -floor_div(-r.numerator(), r.denominator()); }

bool interiors_overlap(const RationalRect& a, const RationalRect& b) {
  return std::max(a.x0, b.x0) < std::min(a.x1, b.x1) && std::max(a.y0, b.y0) < std::min(a.y1, b.y1);
}

struct FoldedPiece {
  RationalRect rect;  // inside [0,1]^2
  IntVec2 shift;      // original = folded + shift
};

}  // namespace

CellSet::CellSet(std::vector<RationalRect> rects) : rects_(std::move(rects)) {
  for (const auto& r : rects_) {
    if (!(r.x0 < r.x1) || !(r.y0 < r.y1)) throw ValidationError("rectangle with non-positive size");
    area_ += r.area();
  }
  // Sweep in order of left edge; only rectangles starting before the current right edge can meet it.
  std::vector<std::size_t> order(rects_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rects_[a].x0 < rects_[b].x0; });
  for (std::size_t a = 0; a < order.size(); ++a) {
    const RationalRect& r = rects_[order[a]];
    for (std::size_t b = a + 1; b < order.size() && rects_[order[b]].x0 < r.x1; ++b) {
      if (interiors_overlap(r, rects_[order[b]])) throw ValidationError("rectangles overlap");
    }
  }
}

bool CellSet::contains(const RationalPoint& p) const {
  return std::any_of(rects_.begin(), rects_.end(), [&](const RationalRect& r) { return r.contains(p); });
}

BlichfeldtResult blichfeldt_translate(const CellSet& b, int k) {
  if (k < 1) throw PreconditionViolated("k must be a positive integer");
  if (!(b.area() > Rational(k))) throw AreaTooSmall("area of B does not exceed k");

  std::vector<FoldedPiece> pieces;
  for (const auto& r : b.rects()) {
    for (std::int64_t ix = floor_rational(r.x0); ix < ceil_rational(r.x1); ++ix) {
      for (std::int64_t iy = floor_rational(r.y0); iy < ceil_rational(r.y1); ++iy) {
        RationalRect piece{std::max(r.x0, Rational(ix)), std::min(r.x1, Rational(ix + 1)),
                           std::max(r.y0, Rational(iy)), std::min(r.y1, Rational(iy + 1))};
        if (!(piece.x0 < piece.x1) || !(piece.y0 < piece.y1)) continue;
        piece.x0 -= ix;
        piece.x1 -= ix;
        piece.y0 -= iy;
        piece.y1 -= iy;
        pieces.push_back({piece, IntVec2(ix, iy)});
      }
    }
  }

  std::vector<Rational> xs{0, 1}, ys{0, 1};
  for (const auto& p : pieces) {
    xs.push_back(p.rect.x0);
    xs.push_back(p.rect.x1);
    ys.push_back(p.rect.y0);
    ys.push_back(p.rect.y1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  const std::size_t nx = xs.size() - 1, ny = ys.size() - 1;
  std::vector<int> coverage(nx * ny, 0);
  auto index_of = [](const std::vector<Rational>& v, const Rational& r) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), r) - v.begin());
  };
  for (const auto& p : pieces) {
    const std::size_t ax = index_of(xs, p.rect.x0), bx = index_of(xs, p.rect.x1);
    const std::size_t ay = index_of(ys, p.rect.y0), by = index_of(ys, p.rect.y1);
    for (std::size_t i = ax; i < bx; ++i) {
      for (std::size_t j = ay; j < by; ++j) ++coverage[i * ny + j];
    }
  }

  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (coverage[i * ny + j] < k + 1) continue;
      const RationalPoint center{(xs[i] + xs[i + 1]) / 2, (ys[j] + ys[j + 1]) / 2};
      BlichfeldtResult out;
      out.multiplicity = coverage[i * ny + j];
      out.translate = {-center.x, -center.y};
      for (const auto& p : pieces) {
        if (!p.rect.contains_interior(center)) continue;
        out.points.push_back({center.x + p.shift[0], center.y + p.shift[1]});
        if (static_cast<int>(out.points.size()) == k + 1) break;
      }
      return out;
    }
  }
  // Unreachable when area > k: the coverage integrates to area(B).
  throw Error("blichfeldt_translate: no subcell with coverage k+1");
}

PigeonholePairs pigeonhole_pairs(const std::vector<IntVec2>& points, std::int64_t l) {
  if (l < 1) throw PreconditionViolated("box size must be positive");
  if (static_cast<std::int64_t>(points.size()) < l + 1) throw PreconditionViolated("need at least l+1 points");
  std::map<std::int64_t, std::vector<std::int64_t>> by_row, by_column;
  for (const auto& p : points) {
    if (p[0] < 1 || p[0] > l || p[1] < 1 || p[1] > l) throw PreconditionViolated("point outside {1..l}^2");
    by_row[p[1]].push_back(p[0]);
    by_column[p[0]].push_back(p[1]);
  }
  for (auto& [key, vals] : by_row) {
    std::sort(vals.begin(), vals.end());
    if (std::adjacent_find(vals.begin(), vals.end()) != vals.end()) throw PreconditionViolated("points not distinct");
  }
  PigeonholePairs out;
  bool have_row = false, have_column = false;
  for (auto& [y, xs] : by_row) {
    if (xs.size() >= 2) {
      out.row_pair = {IntVec2(xs[0], y), IntVec2(xs[1], y)};
      have_row = true;
      break;
    }
  }
  for (auto& [x, ys] : by_column) {
    if (ys.size() >= 2) {
      std::sort(ys.begin(), ys.end());
      out.column_pair = {IntVec2(x, ys[0]), IntVec2(x, ys[1])};
      have_column = true;
      break;
    }
  }
  if (!have_row || !have_column) throw Error("pigeonhole_pairs: no pair found");
  return out;
}

}  // namespace torusendo
