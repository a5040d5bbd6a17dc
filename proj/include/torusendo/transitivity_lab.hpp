#pragma once

#include "torusendo/map_model.hpp"
#include "torusendo/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace torusendo {

/// Closed square [i, i+1] x [j, j+1] scaled by 2^-level.
struct DyadicCell {
  int level = 0;
  std::int64_t i = 0;
  std::int64_t j = 0;

  double side() const { return std::ldexp(1.0, -level); }
  Vec2 lower() const { return Vec2(static_cast<double>(i), static_cast<double>(j)) * side(); }
  Vec2 center() const { return (Vec2(static_cast<double>(i), static_cast<double>(j)) + Vec2(0.5, 0.5)) * side(); }
  bool operator==(const DyadicCell&) const = default;
  auto operator<=>(const DyadicCell&) const = default;
};

enum class RegionKind { OuterCover, InnerWitnessSet };

/// A witness is the computed image of a sample point, stored with the sample it came from.
struct Witness {
  LiftPoint point;
  Vec2 source = Vec2::Zero();
};

/// Cells all at one level. OuterCover: the union of cells contains the true region.
/// InnerWitnessSet: cells describe the starting region, witnesses are members of its image.
struct RegionCover {
  RegionKind kind = RegionKind::OuterCover;
  int level = 5;
  int iterate = 0;
  bool on_torus = false;          ///< cell coordinates reduced modulo 2^level
  std::vector<DyadicCell> cells;  ///< sorted, unique
  std::vector<Witness> witnesses;

  /// Whether the plane point lies in the union of the (closed) cells.
  bool covers(const Vec2& x) const;
  bool covers(const LiftPoint& x) const;
  double area() const;
};

/// Cells of the given level inside the closed box [lo, hi].
RegionCover box_region(const Vec2& lo, const Vec2& hi, int level = 5);
/// Cells of the given level inside the open disc. Throws PreconditionViolated when none fit.
RegionCover ball_region(const Vec2& center, double radius, int level = 5);

/// density x density samples at the centres of a regular subgrid of every cell.
RegionCover with_witnesses(const RegionCover& region, int density = 8);

struct IterateOptions {
  std::size_t cell_budget = std::size_t{1} << 22;
};

/// n-th image. Witness sets map their points on the lift. Outer covers are iterated one step at
/// a time: each cell goes to the box around its centre image widened by the per-row Lipschitz
/// bound, then to the cells meeting that box with positive area. Throws CellBlowup.
RegionCover iterate_region(const TorusEndomorphism& f, const RegionCover& region, int n,
                           const IterateOptions& options = {});

/// Two points of f~^n(U) whose difference is a nonzero integer multiple of a basis vector.
struct EssentialPair {
  LiftPoint first;   ///< image of first_source
  LiftPoint second;  ///< image of second_source, second - first = multiple * e_axis
  Vec2 first_source = Vec2::Zero();
  Vec2 second_source = Vec2::Zero();
  int axis = 0;
  std::int64_t multiple = 0;
  double displacement_residual = 0.0;  ///< |second - first - multiple e_axis|_inf
  double chain_residual = 0.0;         ///< max per-step |f~(x_i) - x_{i+1}| along second's chain
};

struct EssentialityReport {
  int iterate = 0;
  EssentialPair horizontal;  ///< axis 0
  EssentialPair vertical;    ///< axis 1
  int density = 0;
  std::string route;  ///< "lattice-scan" or "blichfeldt"
};

struct SearchOptions {
  int density = 8;                          ///< starting samples per cell edge
  std::size_t witness_budget = 1u << 16;    ///< density doubles while the sample count stays within this
  double tolerance = 1e-8;
  int candidates_per_axis = 64;
};

/// Smallest n <= n_max with an e1 pair and an e2 pair in f~^n(U). U must be connected. Pairs are
/// proposed from binned witnesses (directly, then through blichfeldt_translate and
/// pigeonhole_pairs), refined by pulling f~^n(s) + k e_i back to U and re-verified.
std::optional<EssentialityReport> doubly_essential_witness(const TorusEndomorphism& f, const RegionCover& region,
                                                           int n_max, const SearchOptions& options = {});

struct EssentialBound {
  int iterate = 0;
  double lhs_scaled = 0.0;  ///< (2 (1 + kappa) ||A^N|| + 2 kappa) / lambda^N
  double rhs = 0.0;         ///< Leb(B)
};

/// Smallest N >= 1 with 2 (1 + kappa) ||A^N||_2 + 2 kappa < lambda^N Leb(B). Throws NoFiniteN when
/// lambda does not exceed the spectral radius of A.
EssentialBound essential_iterate_bound(double kappa, double leb, const IntMat2& a, double lambda);

struct CoveringReport {
  int iterate = 0;
  int resolution = 0;
  int density = 0;
  std::size_t witness_count = 0;
};

/// Smallest n <= n_max whose witness set meets every cell of the m x m torus grid. At each n the
/// density is escalated up to the budget before moving on.
std::optional<CoveringReport> covering_witness(const TorusEndomorphism& f, const RegionCover& region, int m,
                                               int n_max, const SearchOptions& options = {});

/// CSV with header n,x,y,lift_i,lift_j.
void write_witness_csv(std::ostream& out, const RegionCover& region);

}  // namespace torusendo
