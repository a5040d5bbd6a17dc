#pragma once

#include "torusendo/types.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace torusendo {

// ---------------------------------------------------------------------------
// Overflow-checked integer matrix arithmetic
// ---------------------------------------------------------------------------

std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

IntMat2 checked_product(const IntMat2& a, const IntMat2& b);
IntVec2 checked_product(const IntMat2& a, const IntVec2& v);
std::int64_t checked_det(const IntMat2& a);
std::int64_t checked_trace(const IntMat2& a);

/// Inverse of a matrix with determinant +-1.
IntMat2 unimodular_inverse(const IntMat2& p);

/// Adjugate, so that a * adjugate(a) = det(a) * I.
IntMat2 adjugate(const IntMat2& a);

bool is_lower_triangular(const IntMat2& a);

/// Exact test that every eigenvalue has modulus strictly greater than one.
bool is_expanding(const IntMat2& a);

/// Largest eigenvalue modulus.
double spectral_radius(const IntMat2& a);

// ---------------------------------------------------------------------------
// Eigendata and the lower-triangular canonical form
// ---------------------------------------------------------------------------

struct EigenData {
  std::int64_t lambda1 = 0;  ///< |lambda1| >= |lambda2|, ties broken by lambda1 >= lambda2
  std::int64_t lambda2 = 0;
  IntVec2 eigenvector = IntVec2::Zero();  ///< primitive, A v = lambda2 v, first nonzero entry > 0
};

/// Integer eigenvalues of A, or nullopt when the spectrum is complex or irrational.
std::optional<EigenData> integer_eigenvalues(const IntMat2& a);

struct CanonicalForm {
  IntMat2 change_of_basis;  ///< P, det P = 1
  IntMat2 triangular;       ///< T = P^-1 A P = [[lambda1, 0], [mu, lambda2]]
  EigenData eigen;
};

/// SL(2,Z) conjugation of A to lower-triangular form with diagonal (lambda1, lambda2).
/// Throws NoIntegerEigenvalues.
CanonicalForm canonical_form(const IntMat2& a);

/// Bezout pair p*a + q*b = 1 for coprime a, b with minimal |p|; ties go to the negative p.
std::pair<std::int64_t, std::int64_t> bezout_minimal(std::int64_t a, std::int64_t b);

// ---------------------------------------------------------------------------
// Exact rational cell sets and lattice translates
// ---------------------------------------------------------------------------

using Rational = boost::rational<std::int64_t>;

struct RationalPoint {
  Rational x;
  Rational y;
  bool operator==(const RationalPoint&) const = default;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1] with positive width and height.
struct RationalRect {
  Rational x0, x1, y0, y1;

  Rational area() const { return (x1 - x0) * (y1 - y0); }
  bool contains(const RationalPoint& p) const { return x0 <= p.x && p.x <= x1 && y0 <= p.y && p.y <= y1; }
  bool contains_interior(const RationalPoint& p) const {
    return x0 < p.x && p.x < x1 && y0 < p.y && p.y < y1;
  }
};

/// Finite union of rectangles with pairwise disjoint interiors. The area is the exact sum.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(std::vector<RationalRect> rects);

  const std::vector<RationalRect>& rects() const { return rects_; }
  const Rational& area() const { return area_; }
  bool contains(const RationalPoint& p) const;

 private:
  std::vector<RationalRect> rects_;
  Rational area_{0};
};

struct BlichfeldtResult {
  RationalPoint translate;             ///< t with t + points[i] in Z^2
  std::vector<RationalPoint> points;   ///< k+1 points of B
  int multiplicity = 0;                ///< fold coverage at the chosen subcell, >= k+1
};

/// k+1 points of B that pairwise differ by nonzero integer vectors. Requires area(B) > k.
/// Throws AreaTooSmall.
BlichfeldtResult blichfeldt_translate(const CellSet& b, int k);

struct PigeonholePairs {
  std::array<IntVec2, 2> row_pair;     ///< same second coordinate
  std::array<IntVec2, 2> column_pair;  ///< same first coordinate
};

/// Given at least l+1 distinct points of {1..l}^2 returns a pair on a common row and a pair on a
/// common column. Throws PreconditionViolated.
PigeonholePairs pigeonhole_pairs(const std::vector<IntVec2>& points, std::int64_t l);

}  // namespace torusendo
