#include "torusendo/directions.hpp"
#include "torusendo/errors.hpp"
#include "torusendo/gallery.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace torusendo;

namespace {

std::size_t branch_to(const TorusEndomorphism& f, const Vec2& q, const Vec2& target) {
  const auto pre = preimages(f, q);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (torus_distance(pre[i], target) < 1e-9) return i;
  }
  FAIL("no branch reaches the target");
  return 0;
}

// (3x, 2y + c sin(2 pi x)): the vertical image of a horizontal vector depends on x.
TorusEndomorphism sheared_product(double c) {
  return TorusEndomorphism(IntMat2{{3, 0}, {0, 2}}, PeriodicField({}, {FourierTerm{c, TrigKind::Sin, {1, 0}}}));
}

}  // namespace

TEST_CASE("linear unstable direction") {
  const auto f = linear_map(IntMat2{{5, 0}, {0, 2}});
  const auto probe = unstable_direction(f, Vec2(0.3, 0.7), {0, 3, 1}, 20);
  CHECK(probe.direction == Vec2(1, 0));
  REQUIRE(probe.widths.size() == 21);
  for (int k = 0; k <= 20; ++k) CHECK(probe.widths[k] == doctest::Approx(2 * std::atan(std::pow(0.4, k))));
}

TEST_CASE("cone width at the fixed point") {
  // Df(0,0) = diag(6, 0.9): k pushes map the boundary rays to (6^k, +-0.9^k).
  const auto f = paper_example(0.1);
  const std::size_t stay = branch_to(f, Vec2(0, 0), Vec2(0, 0));
  const auto probe = unstable_direction(f, Vec2(0, 0), {stay}, 15);
  CHECK(probe.direction == Vec2(1, 0));
  for (int k = 0; k <= 15; ++k) {
    CHECK(probe.widths[k] == doctest::Approx(2 * std::atan(std::pow(0.15, k))).epsilon(1e-12));
  }
}

TEST_CASE("widths shrink along any pre-orbit of a certified map") {
  const auto f = paper_example(0.1);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    const auto probe = unstable_direction(f, Vec2(u(rng), u(rng)), {rng() % 10, rng() % 10, rng() % 10}, 25);
    for (std::size_t k = 1; k < probe.widths.size(); ++k) CHECK(probe.widths[k] <= probe.widths[k - 1]);
    CHECK(probe.width < 1e-6);
    CHECK(probe.width == probe.widths.back());
  }
}

TEST_CASE("unstable directions are pushed forward by the derivative") {
  const auto f = paper_example(0.1);
  const Vec2 p(0.61, 0.27);
  const Vec2 p1 = preimages(f, p)[0];
  const auto here = unstable_direction(f, p, {0}, 30);
  const auto before = unstable_direction(f, p1, {0}, 29);
  CHECK(projective_angle(f.derivative(p1) * before.direction, here.direction) < 1e-8);
}

TEST_CASE("product maps are specially partially hyperbolic") {
  const auto rep = special_ph_test(product_example(), Vec2(0.4, 0.1), 30, 12, 7);
  CHECK(rep.trials == 12);
  CHECK(rep.probes.size() == 12);
  CHECK(rep.max_angle <= 1e-12);
  for (const auto& p : rep.probes) CHECK(p.direction == Vec2(1, 0));
}

TEST_CASE("a sheared product has pre-orbit dependent directions") {
  const auto rep = special_ph_test(sheared_product(0.05), Vec2(0.4, 0.1), 30, 16, 7);
  MESSAGE("sheared product max angle " << rep.max_angle);
  CHECK(rep.max_angle > 1e-6);
  CHECK(rep.max_angle > 100 * rep.max_width);
  CHECK(rep.bound == rep.max_angle + rep.max_width);
}

TEST_CASE("special test is reproducible from its seed") {
  const auto f = paper_example(0.1);
  const auto a = special_ph_test(f, Vec2(0.2, 0.2), 20, 6, 99);
  const auto b = special_ph_test(f, Vec2(0.2, 0.2), 20, 6, 99);
  CHECK(a.max_angle == b.max_angle);
  for (std::size_t i = 0; i < a.probes.size(); ++i) CHECK(a.probes[i].direction == b.probes[i].direction);
}

TEST_CASE("centre directions") {
  const auto lin = center_direction(linear_map(IntMat2{{5, 0}, {0, 2}}), Vec2(0.3, 0.3), 30);
  CHECK(lin.direction == Vec2(0, 1));
  CHECK(lin.verified_steps == 31);
  const auto ex = center_direction(paper_example(0.1), Vec2(0, 0), 30);
  CHECK(projective_angle(ex.direction, Vec2(0, 1)) < 1e-12);
  const auto prod = center_direction(product_example(), Vec2(0.2, 0.7), 30);
  CHECK(projective_angle(prod.direction, Vec2(0, 1)) < 1e-12);
}

TEST_CASE("centre directions are invariant") {
  const auto f = paper_example(0.1);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    const Vec2 p(u(rng), u(rng));
    const auto here = center_direction(f, p, 30);
    const auto next = center_direction(f, f.step(p), 30);
    CHECK(projective_angle(f.derivative(p) * here.direction, next.direction) < 1e-6);
  }
}

TEST_CASE("centre direction inside the cone is rejected") {
  CHECK_THROWS_AS(center_direction(linear_map(IntMat2{{5, 0}, {0, 2}}), Vec2(0.3, 0.3), 10,
                                   ConeSpec{1.0, ConeOrientation::Vertical}),
                  ExclusionFailed);
}

TEST_CASE("direction csv") {
  std::ostringstream out;
  write_direction_csv(out, {center_direction(linear_map(IntMat2{{5, 0}, {0, 2}}), Vec2(0.5, 0.5), 5)});
  const std::string text = out.str();
  CHECK(text.rfind("x,y,dir_x,dir_y,width\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
