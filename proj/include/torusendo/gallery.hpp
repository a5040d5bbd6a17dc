#pragma once

#include "torusendo/map_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace torusendo {

/// (5x + sin(2 pi x)/(2 pi), 2y - (1+eps) cos^2(pi x) sin(2 pi y)/(2 pi)). Requires 0 <= eps < 1,
/// where the Jacobian stays positive.
TorusEndomorphism paper_example(double eps = 0.1);

/// (3x, g(y)) with g(y) = 2y - sin(2 pi y)/(2 pi) - 0.1 sin(4 pi y)/(2 pi).
TorusEndomorphism product_example();

TorusEndomorphism linear_map(const IntMat2& a);

/// Bounds for a product (3x, g(y)) read off its coefficients. The derivative bounds come from
/// a grid of g' values widened by sup|g''| times half the spacing.
struct FiberMapBounds {
  double value_at_zero = 0.0;       ///< g(0)
  double derivative_at_zero = 0.0;  ///< g'(0)
  double min_derivative = 0.0;      ///< lower bound on g'
  double max_derivative = 0.0;      ///< upper bound on g'
  double second_derivative = 0.0;   ///< upper bound on |g''|
};

/// Throws ValidationError when f is not of the form (A x, g(y)) with diagonal A.
FiberMapBounds fiber_map_bounds(const TorusEndomorphism& f, int grid = 4096);

std::vector<std::string> gallery_names();

/// paper_example (uses eps), product_example, linear (uses matrix, default diag(5,2)).
/// Throws UnknownName.
TorusEndomorphism gallery(const std::string& name, std::optional<double> eps = std::nullopt,
                          std::optional<IntMat2> matrix = std::nullopt);

}  // namespace torusendo
