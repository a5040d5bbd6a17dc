#pragma once

#include "torusendo/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace torusendo {

enum class TrigKind { Sin, Cos };

/// coefficient * kind(2 pi (k1 x + k2 y))
struct FourierTerm {
  double coefficient = 0.0;
  TrigKind kind = TrigKind::Sin;
  std::array<int, 2> wavevector{0, 0};

  bool operator==(const FourierTerm&) const = default;
};

/// Z^2-periodic displacement f~ - A, one term list per coordinate.
class PeriodicField {
 public:
  PeriodicField() = default;
  /// Throws ValidationError on a sin term with zero wavevector or a non-finite coefficient.
  PeriodicField(std::vector<FourierTerm> first, std::vector<FourierTerm> second);

  const std::vector<FourierTerm>& component(int i) const { return components_[static_cast<std::size_t>(i)]; }
  bool empty() const { return components_[0].empty() && components_[1].empty(); }

  Vec2 value(const Vec2& x) const;
  Mat2 jacobian(const Vec2& x) const;
  PeriodicField scaled(double c) const;

  bool operator==(const PeriodicField&) const = default;

 private:
  std::array<std::vector<FourierTerm>, 2> components_;
};

/// Smooth endomorphism of the 2-torus: integer linear part plus trigonometric displacement.
class TorusEndomorphism {
 public:
  TorusEndomorphism(const IntMat2& linear_part, PeriodicField displacement, std::string name = {});

  const IntMat2& linear_part() const { return linear_; }
  const Mat2& linear_part_real() const { return linear_real_; }
  const PeriodicField& displacement() const { return displacement_; }
  const std::string& name() const { return name_; }

  /// Lift f~(x) = A x + D(x).
  Vec2 lift(const Vec2& x) const;
  /// Df at p.
  Mat2 derivative(const Vec2& p) const;
  /// Torus map, result in [0,1)^2.
  Vec2 step(const Vec2& p) const { return wrap_unit(lift(wrap_unit(p))); }
  /// Lift acting on the split representation: f~(c + r) = A c + f~(r).
  LiftPoint step(const LiftPoint& p) const;

  bool operator==(const TorusEndomorphism& other) const;

 private:
  IntMat2 linear_;
  Mat2 linear_real_;
  PeriodicField displacement_;
  std::string name_;
};

Vec2 eval_lift(const TorusEndomorphism& f, const Vec2& x);
Mat2 eval_derivative(const TorusEndomorphism& f, const Vec2& p);
double jacobian_det(const TorusEndomorphism& f, const Vec2& p);

struct LinearPartEstimate {
  IntMat2 matrix;
  double residual = 0.0;  ///< max distance of a column from the nearest integer vector
};

using LiftEvaluator = std::function<Vec2(const Vec2&)>;

/// Columns f~(x + e_j) - f~(x) at x = 0, rounded. Throws ResidualTooLarge above 1e-6.
LinearPartEstimate extract_linear_part(const LiftEvaluator& lift);
LinearPartEstimate extract_linear_part(const TorusEndomorphism& f);

/// Per-coordinate sums of |coefficients|: a rigorous bound on |f~ - A| in each coordinate.
Vec2 sup_displacement_components(const TorusEndomorphism& f);
/// kappa_0 = max of the per-coordinate bounds, i.e. a bound on ||f~ - A||_inf.
double sup_displacement_bound(const TorusEndomorphism& f);

/// Entrywise bounds on Df used by the certifiers. For q with |q - p|_inf <= h, each entry
/// satisfies |Df_q(i,j) - Df_p(i,j)| <= gradient(i,j) * h.
struct DerivativeBounds {
  Mat2 sup_abs;   ///< sup_p |Df_p(i,j)|
  Mat2 gradient;  ///< sum over terms |c| (2 pi)^2 |k_j| |k|_1 for row i
  /// Bound on ||f~(q) - f~(p)||_inf / ||q - p||_inf (max row sum of sup_abs).
  double lipschitz_inf() const;
};

DerivativeBounds derivative_bounds(const TorusEndomorphism& f);

struct LipschitzBounds {
  double derivative = 0.0;   ///< max_ij |Df_p(i,j) - Df_q(i,j)| <= derivative * |p - q|
  double determinant = 0.0;  ///< |det Df_p - det Df_q| <= determinant * |p - q|
};

LipschitzBounds lipschitz_bounds(const TorusEndomorphism& f);

/// The |det A| torus points mapped onto q, found by damped Newton from A^-1 (q + w) for w in a
/// residue system of Z^2 / A Z^2. Throws BranchDivergence.
std::vector<Vec2> preimages(const TorusEndomorphism& f, const Vec2& q);

/// The unique lift preimage x with f~(x) = target (f~ is a homeomorphism of the plane).
/// Throws BranchDivergence.
Vec2 lift_preimage(const TorusEndomorphism& f, const Vec2& target);
LiftPoint lift_preimage(const TorusEndomorphism& f, const LiftPoint& target);

/// Integer vectors w with A^-1 w in [0,1)^2; exactly |det A| of them.
std::vector<IntVec2> residue_system(const IntMat2& a);

}  // namespace torusendo
