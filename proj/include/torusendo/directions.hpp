#pragma once

#include "torusendo/map_model.hpp"
#include "torusendo/ph_certifier.hpp"
#include "torusendo/types.hpp"

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

namespace torusendo {

struct DirectionProbe {
  Vec2 base = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();  ///< unit, larger component positive
  int depth = 0;
  /// Unstable probes: angle between the two pushed boundary rays. Centre probes: angle between
  /// the results of the two starting candidates with the largest backward growth.
  double width = 0.0;
  /// Unstable probes: widths[k] is the width after pushing the cone k steps (k = 0..depth).
  std::vector<double> widths;
  /// Centre probes: number of steps i = 0..depth at which the image stays outside the cone.
  int verified_steps = 0;
};

/// Pushes the cone at the end of the pre-orbit p_0 = p, p_{k+1} = preimages(p_k)[choices[k]]
/// forward to p. Choices are reduced modulo the number of preimages and reused cyclically; an
/// empty list means branch 0. Throws BranchDivergence.
DirectionProbe unstable_direction(const TorusEndomorphism& f, const Vec2& p, const std::vector<std::size_t>& choices,
                                  int depth, const ConeSpec& cone = {});

struct SpecialPhReport {
  double max_angle = 0.0;  ///< largest pairwise angle among the sampled directions
  double max_width = 0.0;  ///< largest residual width among the probes
  double bound = 0.0;      ///< max_angle + max_width
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<DirectionProbe> probes;
};

/// unstable_direction over random branch sequences drawn from a seeded generator.
SpecialPhReport special_ph_test(const TorusEndomorphism& f, const Vec2& p, int depth, int trials,
                                std::uint64_t seed = 1, const ConeSpec& cone = {});

/// Most contracted direction of Df^depth at p, found by a normalised backward sweep with the
/// transposed derivatives, then checked step by step against the cone. Throws ExclusionFailed.
DirectionProbe center_direction(const TorusEndomorphism& f, const Vec2& p, int depth, const ConeSpec& cone = {});

/// CSV with header x,y,dir_x,dir_y,width.
void write_direction_csv(std::ostream& out, const std::vector<DirectionProbe>& probes);

}  // namespace torusendo
