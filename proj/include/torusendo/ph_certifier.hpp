#pragma once

#include "torusendo/map_model.hpp"
#include "torusendo/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace torusendo {

enum class ConeOrientation { Horizontal, Vertical };

/// Horizontal: {v : |v2| <= slope |v1|}. Vertical: {v : |v1| <= slope |v2|}.
struct ConeSpec {
  double slope = 1.0;
  ConeOrientation orientation = ConeOrientation::Horizontal;

  /// Index of the coordinate the cone is centred on.
  int main_axis() const { return orientation == ConeOrientation::Horizontal ? 0 : 1; }
  int cross_axis() const { return 1 - main_axis(); }
  bool contains(const Vec2& v) const { return std::abs(v[cross_axis()]) <= slope * std::abs(v[main_axis()]); }
  /// The two boundary rays, main component 1.
  std::pair<Vec2, Vec2> boundary_rays() const;
};

/// Cells of side 1/resolution, iterate ell, expansion target lambda. Inconclusive runs double
/// the resolution up to max_resolution.
struct GridSpec {
  int resolution = 512;
  int iterate = 1;
  double expansion = 2.0;
  int max_resolution = 8192;
};

enum class Verdict { Certified, Failed, Inconclusive };

std::string to_string(Verdict v);

struct Certificate {
  std::string condition;
  GridSpec grid;                 ///< resolution is the one the verdict was reached at
  double threshold = 0.0;        ///< lambda for cone expansion, |lambda1|^n for volume
  double worst_margin = 0.0;     ///< min over cells of (centre margin - slack)
  double slack_used = 0.0;       ///< max over cells of the Lipschitz slack
  double min_center_margin = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  /// Failed: the violating cell centre. Otherwise: the centre realising worst_margin.
  std::optional<Vec2> witness;
  std::vector<int> resolutions_tried;
  std::vector<std::pair<std::string, double>> details;
  double seconds = 0.0;
};

/// Exact min of |Mv|/|v| over the cone: the boundary rays and, when it lies in the cone, the
/// smallest singular direction of M.
double min_expansion_on_cone(const Mat2& m, const ConeSpec& cone);

/// Pointwise cone condition at p for Df^ell: min of (slope - largest image-ray slope) and
/// (min expansion - lambda). Positive means both hold strictly.
double pointwise_cone_margin(const TorusEndomorphism& f, const ConeSpec& cone, int iterate, double expansion,
                             const Vec2& p);

/// |det Df^n_p| - |lambda1|^n.
double pointwise_volume_margin(const TorusEndomorphism& f, int n, const Vec2& p);

/// Grid certificate of cone invariance and expansion for Df^ell. A Certified verdict proves
/// both conditions at every point of the torus.
Certificate certify_cone_invariance(const TorusEndomorphism& f, const ConeSpec& cone, const GridSpec& grid);

/// Grid certificate of |det Df^n_p| > |lambda1|^n for all p. Throws NoIntegerEigenvalues.
Certificate certify_strong_volume_expansion(const TorusEndomorphism& f, const GridSpec& grid, int n = 1);

/// Largest singular value of a 2x2 matrix.
double operator_norm(const Mat2& m);

}  // namespace torusendo
