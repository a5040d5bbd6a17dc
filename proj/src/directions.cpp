#include "torusendo/directions.hpp"

#include "torusendo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace torusendo {

namespace {

Vec2 perp(const Vec2& v) { return {-v[1], v[0]}; }

struct PushedCone {
  Vec2 up;
  Vec2 down;
};

// Boundary rays of the cone at orbit[k], pushed through Df at orbit[k], ..., orbit[1].
PushedCone push_cone(const TorusEndomorphism& f, const std::vector<Vec2>& orbit, int k, const ConeSpec& cone) {
  auto [up, down] = cone.boundary_rays();
  up.normalize();
  down.normalize();
  for (int i = k; i >= 1; --i) {
    const Mat2 d = f.derivative(orbit[static_cast<std::size_t>(i)]);
    up = (d * up).normalized();
    down = (d * down).normalized();
  }
  return {up, down};
}

}  // namespace

DirectionProbe unstable_direction(const TorusEndomorphism& f, const Vec2& p, const std::vector<std::size_t>& choices,
                                  int depth, const ConeSpec& cone) {
  if (depth < 0) throw PreconditionViolated("depth must be nonnegative");
  std::vector<Vec2> orbit{wrap_unit(p)};
  for (int k = 0; k < depth; ++k) {
    const auto pre = preimages(f, orbit.back());
    const std::size_t c = choices.empty() ? 0 : choices[static_cast<std::size_t>(k) % choices.size()];
    orbit.push_back(pre[c % pre.size()]);
  }
  DirectionProbe out;
  out.base = orbit.front();
  out.depth = depth;
  for (int k = 0; k <= depth; ++k) {
    const PushedCone pc = push_cone(f, orbit, k, cone);
    out.widths.push_back(projective_angle(pc.up, pc.down));
    if (k == depth) {
      const Vec2 down = pc.up.dot(pc.down) < 0 ? Vec2(-pc.down) : pc.down;
      out.direction = canonical_direction(pc.up + down);
      out.width = out.widths.back();
    }
  }
  return out;
}

SpecialPhReport special_ph_test(const TorusEndomorphism& f, const Vec2& p, int depth, int trials,
                                std::uint64_t seed, const ConeSpec& cone) {
  if (trials < 1) throw PreconditionViolated("trials must be positive");
  const auto branches = static_cast<std::uint64_t>(std::abs(f.linear_part().determinant()));
  std::mt19937_64 rng(seed);
  SpecialPhReport rep;
  rep.seed = seed;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> choices(static_cast<std::size_t>(std::max(depth, 1)));
    for (auto& c : choices) c = static_cast<std::size_t>(rng() % branches);
    rep.probes.push_back(unstable_direction(f, p, choices, depth, cone));
    rep.max_width = std::max(rep.max_width, rep.probes.back().width);
  }
  for (std::size_t a = 0; a < rep.probes.size(); ++a) {
    for (std::size_t b = a + 1; b < rep.probes.size(); ++b) {
      rep.max_angle = std::max(rep.max_angle, projective_angle(rep.probes[a].direction, rep.probes[b].direction));
    }
  }
  rep.bound = rep.max_angle + rep.max_width;
  return rep;
}

DirectionProbe center_direction(const TorusEndomorphism& f, const Vec2& p, int depth, const ConeSpec& cone) {
  if (depth < 1) throw PreconditionViolated("depth must be positive");
  std::vector<Mat2> derivs;
  Vec2 q = wrap_unit(p);
  for (int i = 0; i < depth; ++i) {
    derivs.push_back(f.derivative(q));
    q = f.step(q);
  }
  // w_i = D_i^T w_{i+1}; the image of perp(w_0) after i steps is parallel to perp(w_i).
  // A start lying on a weaker eigen-covector never leaves it, so candidates are ranked by the
  // growth of the backward sweep and only the winner is checked against the cone.
  struct Attempt {
    Vec2 direction;
    int verified;
    double log_growth;
  };
  const Vec2 starts[4] = {Vec2::UnitX(), Vec2::UnitY(), Vec2(1, 1).normalized(), Vec2(1, -1).normalized()};
  std::vector<Attempt> attempts;
  for (const Vec2& start : starts) {
    std::vector<Vec2> w(static_cast<std::size_t>(depth) + 1);
    w[static_cast<std::size_t>(depth)] = start;
    double growth = 0.0;
    for (int i = depth - 1; i >= 0; --i) {
      const Vec2 next = derivs[static_cast<std::size_t>(i)].transpose() * w[static_cast<std::size_t>(i) + 1];
      growth += std::log(next.norm());
      w[static_cast<std::size_t>(i)] = next.normalized();
    }
    int verified = 0;
    while (verified <= depth && !cone.contains(perp(w[static_cast<std::size_t>(verified)]))) ++verified;
    attempts.push_back({canonical_direction(perp(w[0])), verified, growth});
  }
  std::stable_sort(attempts.begin(), attempts.end(),
                   [](const Attempt& a, const Attempt& b) { return a.log_growth > b.log_growth; });
  if (attempts[0].verified < depth + 1) {
    throw ExclusionFailed("the most contracted direction enters the cone");
  }
  DirectionProbe out;
  out.base = wrap_unit(p);
  out.depth = depth;
  out.direction = attempts[0].direction;
  out.verified_steps = attempts[0].verified;
  out.width = projective_angle(attempts[0].direction, attempts[1].direction);
  return out;
}

void write_direction_csv(std::ostream& out, const std::vector<DirectionProbe>& probes) {
  out << "x,y,dir_x,dir_y,width\n";
  char buf[160];
  for (const auto& p : probes) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.base[0], p.base[1], p.direction[0],
                  p.direction[1], p.width);
    out << buf;
  }
}

}  // namespace torusendo
