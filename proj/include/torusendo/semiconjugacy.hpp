#pragma once

#include "torusendo/map_model.hpp"
#include "torusendo/types.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace torusendo {

/// Constants of the semiconjugacy h to the linear part. Norms are max-norm operator norms.
struct SemiconjParams {
  double kappa0 = 0.0;  ///< bound on ||f~ - A||_inf
  double kappa = 0.0;   ///< bound on ||h~ - id||_inf
  /// ||A^-m||_inf for m = 0..size()-1, padded upward for rounding.
  std::vector<double> inverse_power_norms;
  /// Bound on sum_{m > M} ||A^-m|| with M = inverse_power_norms.size() - 1.
  double tail_beyond_prefix = 0.0;
  /// rho = ||A^-block|| < 1 drives the geometric tail.
  int block = 1;
  double tail_ratio = 0.0;
  std::vector<Mat2> inverse_powers;  ///< A^-m for the same range

  /// Bound on sum_{m >= n} ||A^-(m+1)||.
  double tail_from(int n) const;
  /// Smallest n with kappa0 * tail_from(n) <= tol.
  int truncation_for(double tol) const;
};

/// kappa from the telescoping series h~ - id = sum_m A^-(m+1) (f~ - A) o f~^m.
/// Throws NotExpanding.
SemiconjParams kappa_bound(const TorusEndomorphism& f);

/// h~(x) to within tol in the max norm. Throws NotExpanding.
Vec2 semiconj_eval(const TorusEndomorphism& f, const Vec2& x, double tol);
Vec2 semiconj_eval(const TorusEndomorphism& f, const SemiconjParams& params, const Vec2& x, double tol);

/// Partial sums h_n(x) = A^-n f~^n(x) for n = 0..count-1, computed stably.
std::vector<Vec2> semiconj_partial_sums(const TorusEndomorphism& f, const SemiconjParams& params, const Vec2& x,
                                        int count);

/// max over the m x m grid of ||h(f(p)) - A h(p)||_inf with h evaluated at tolerance tol.
double semiconj_defect(const TorusEndomorphism& f, int m, double tol);

/// Evidence that the fibre h^-1(h(p)) is nontrivial: sampled points whose lifted orbits stay
/// within r of the orbit of p for depth steps. Numeric evidence: slowly escaping points near the
/// fibre's edge can survive a finite depth, so the diameter may slightly exceed the true one.
struct FiberEstimate {
  Vec2 base = Vec2::Zero();
  double radius = 0.0;
  int depth = 0;
  std::vector<Vec2> witnesses;  ///< lift points near base, base included
  double diameter = 0.0;
  Vec2 direction = Vec2::UnitX();  ///< unit, projective, along the farthest witness pair
};

struct FiberOptions {
  double radius = -1.0;         ///< r; default 3 kappa, or 0.1 when kappa = 0
  int depth = 60;               ///< N; <= 0 picks N with ||A^-N|| * 2 * search_radius < delta / 100
  double search_radius = -1.0;  ///< default 2 kappa + 0.02 (the fibre lies within 2 kappa)
  int samples = 256;
  std::uint64_t seed = 1;
};

/// True when max_{0<=n<=depth} ||f~^n(y) - f~^n(p)|| < r (Euclidean).
bool orbit_stays_close(const TorusEndomorphism& f, const Vec2& p, const Vec2& y, double r, int depth);

FiberEstimate estimate_fiber(const TorusEndomorphism& f, const Vec2& p, const FiberOptions& options = {});

enum class DichotomyKind { ConjugacyEvidence, AnnulusCandidate };

std::string to_string(DichotomyKind k);

struct DichotomyVerdict {
  DichotomyKind kind = DichotomyKind::ConjugacyEvidence;
  double threshold = 0.0;  ///< delta
  int depth = 0;
  FiberEstimate largest;   ///< fibre of maximal diameter found
  std::vector<FiberEstimate> fibers;  ///< in grid order
};

/// Scans an m x m grid with estimate_fiber. Numeric evidence only: it proves neither branch of
/// the conjugacy / annulus alternative. Throws EigenvalueTieError, NoIntegerEigenvalues,
/// NotExpanding.
DichotomyVerdict dichotomy_test(const TorusEndomorphism& f, int m, double delta, const FiberOptions& options = {});

/// CSV with header p_x,p_y,diameter,dir_x,dir_y.
void write_fiber_csv(std::ostream& out, const std::vector<FiberEstimate>& fibers);

}  // namespace torusendo
