#include "torusendo/gallery.hpp"

#include "torusendo/errors.hpp"

#include <cmath>

namespace torusendo {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

}  // namespace

TorusEndomorphism paper_example(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("paper_example needs 0 <= eps < 1");
  IntMat2 a;
  a << 5, 0, 0, 2;
  // cos^2(pi x) sin(2 pi y) = sin(2 pi y)/2 + (sin 2 pi (x + y) + sin 2 pi (y - x))/4
  const double c = -(1.0 + eps) / (2.0 * kPi);
  std::vector<FourierTerm> first{{1.0 / (2.0 * kPi), TrigKind::Sin, {1, 0}}};
  std::vector<FourierTerm> second{{c / 2.0, TrigKind::Sin, {0, 1}},
                                  {c / 4.0, TrigKind::Sin, {1, 1}},
                                  {c / 4.0, TrigKind::Sin, {-1, 1}}};
  return TorusEndomorphism(a, PeriodicField(std::move(first), std::move(second)), "paper_example");
}

TorusEndomorphism product_example() {
  IntMat2 a;
  a << 3, 0, 0, 2;
  std::vector<FourierTerm> second{{-1.0 / (2.0 * kPi), TrigKind::Sin, {0, 1}},
                                  {-1.0 / (20.0 * kPi), TrigKind::Sin, {0, 2}}};
  TorusEndomorphism f(a, PeriodicField({}, std::move(second)), "product_example");
  const FiberMapBounds b = fiber_map_bounds(f);
  if (b.value_at_zero != 0.0) throw ValidationError("product_example: g(0) != 0");
  if (!(b.derivative_at_zero < 1.0)) throw ValidationError("product_example: g'(0) >= 1");
  if (!(b.min_derivative > 2.0 / 3.0 && b.max_derivative < 3.0)) {
    throw ValidationError("product_example: g' leaves (2/3, 3)");
  }
  return f;
}

TorusEndomorphism linear_map(const IntMat2& a) { return TorusEndomorphism(a, PeriodicField(), "linear"); }

FiberMapBounds fiber_map_bounds(const TorusEndomorphism& f, int grid) {
  const IntMat2& a = f.linear_part();
  if (a(0, 1) != 0 || a(1, 0) != 0) throw ValidationError("linear part is not diagonal");
  if (!f.displacement().component(0).empty()) throw ValidationError("first coordinate is not linear");
  const auto& terms = f.displacement().component(1);
  for (const auto& t : terms) {
    if (t.wavevector[0] != 0) throw ValidationError("second coordinate depends on x");
  }
  if (grid < 2) throw PreconditionViolated("grid too small");
  const auto slope = static_cast<double>(a(1, 1));
  auto derivative = [&](double y) {
    double d = slope;
    for (const auto& t : terms) {
      const double w = 2.0 * kPi * t.wavevector[1];
      d += t.kind == TrigKind::Sin ? t.coefficient * w * std::cos(w * y) : -t.coefficient * w * std::sin(w * y);
    }
    return d;
  };
  FiberMapBounds b;
  for (const auto& t : terms) {
    const double w = 2.0 * kPi * t.wavevector[1];
    if (t.kind == TrigKind::Cos) b.value_at_zero += t.coefficient;
    b.second_derivative += std::abs(t.coefficient) * w * w;
  }
  b.derivative_at_zero = derivative(0.0);
  double lo = derivative(0.0), hi = lo;
  for (int i = 1; i < grid; ++i) {
    const double d = derivative(static_cast<double>(i) / grid);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const double slack = b.second_derivative * 0.5 / grid + 1e-12;
  b.min_derivative = lo - slack;
  b.max_derivative = hi + slack;
  return b;
}

std::vector<std::string> gallery_names() { return {"paper_example", "product_example", "linear"}; }

TorusEndomorphism gallery(const std::string& name, std::optional<double> eps, std::optional<IntMat2> matrix) {
  if (name == "paper_example") return paper_example(eps.value_or(0.1));
  if (name == "product_example") return product_example();
  if (name == "linear") {
    IntMat2 a;
    a << 5, 0, 0, 2;
    return linear_map(matrix.value_or(a));
  }
  throw UnknownName("unknown gallery map '" + name + "'");
}

}  // namespace torusendo
