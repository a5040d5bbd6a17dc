#include "torusendo/semiconjugacy.hpp"

#include "torusendo/errors.hpp"
#include "torusendo/integer_linear.hpp"
#include "torusendo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace torusendo {

namespace {

double inf_norm(const Mat2& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

constexpr int kMinPrefix = 400;
constexpr int kMaxPrefix = 20000;

// Suffix sums of the padded prefix, cached per params instance.
double prefix_sum(const SemiconjParams& p, int from, int to) {
  double s = 0.0;
  for (int j = from; j <= to; ++j) s += p.inverse_power_norms[static_cast<std::size_t>(j)];
  return s;
}

}  // namespace

double SemiconjParams::tail_from(int n) const {
  const int last = static_cast<int>(inverse_power_norms.size()) - 1;
  if (n + 1 > last) return tail_beyond_prefix;
  return prefix_sum(*this, n + 1, last) + tail_beyond_prefix;
}

int SemiconjParams::truncation_for(double tol) const {
  if (!(tol > 0.0)) throw PreconditionViolated("tolerance must be positive");
  if (kappa0 == 0.0) return 0;
  const int last = static_cast<int>(inverse_power_norms.size()) - 1;
  double tail = tail_from(0);
  for (int n = 0; n <= last; ++n) {
    if (kappa0 * tail <= tol) return n;
    if (n + 1 <= last) tail -= inverse_power_norms[static_cast<std::size_t>(n + 1)];
  }
  throw PreconditionViolated("tolerance below what the computed power norms can guarantee");
}

SemiconjParams kappa_bound(const TorusEndomorphism& f) {
  if (!is_expanding(f.linear_part())) throw NotExpanding("linear part has an eigenvalue of modulus <= 1");
  SemiconjParams p;
  p.kappa0 = sup_displacement_bound(f);

  const Mat2 a_inv = f.linear_part_real().inverse();
  Mat2 power = Mat2::Identity();
  p.inverse_powers.push_back(power);
  p.inverse_power_norms.push_back(1.0);
  int block = 0;
  for (int m = 1; m <= kMaxPrefix; ++m) {
    power = power * a_inv;
    const double norm = inf_norm(power) * (1.0 + 1e-13 * (m + 1));
    p.inverse_powers.push_back(power);
    p.inverse_power_norms.push_back(norm);
    if (block == 0 && norm <= 0.5) block = m;
    if (block != 0 && m >= kMinPrefix && m >= 4 * block && norm <= 1e-30) break;
  }
  if (block == 0) throw NotExpanding("inverse powers do not contract within the prefix");
  p.block = block;
  p.tail_ratio = p.inverse_power_norms[static_cast<std::size_t>(block)];
  const int last = static_cast<int>(p.inverse_power_norms.size()) - 1;
  // sum_{j > M} ||A^-j|| <= ||A^-M|| * sum_{r=1..c} ||A^-r|| / (1 - rho)
  p.tail_beyond_prefix =
      p.inverse_power_norms[static_cast<std::size_t>(last)] * prefix_sum(p, 1, block) / (1.0 - p.tail_ratio);
  p.kappa = p.kappa0 * (prefix_sum(p, 1, last) + p.tail_beyond_prefix);
  return p;
}

std::vector<Vec2> semiconj_partial_sums(const TorusEndomorphism& f, const SemiconjParams& params, const Vec2& x,
                                        int count) {
  std::vector<Vec2> out;
  if (count <= 0) return out;
  out.reserve(static_cast<std::size_t>(count));
  out.push_back(x);
  Vec2 correction = Vec2::Zero();
  Vec2 p = wrap_unit(x);
  const int last = static_cast<int>(params.inverse_powers.size()) - 1;
  for (int m = 0; m + 1 < count; ++m) {
    if (m + 1 > last) throw PreconditionViolated("partial sum beyond the computed power prefix");
    correction += params.inverse_powers[static_cast<std::size_t>(m + 1)] * f.displacement().value(p);
    out.push_back(x + correction);
    p = f.step(p);
  }
  return out;
}

Vec2 semiconj_eval(const TorusEndomorphism& f, const SemiconjParams& params, const Vec2& x, double tol) {
  const int n = params.truncation_for(tol);
  if (n == 0) return x;
  Vec2 correction = Vec2::Zero();
  Vec2 p = wrap_unit(x);
  for (int m = 0; m < n; ++m) {
    correction += params.inverse_powers[static_cast<std::size_t>(m + 1)] * f.displacement().value(p);
    p = f.step(p);
  }
  return x + correction;
}

Vec2 semiconj_eval(const TorusEndomorphism& f, const Vec2& x, double tol) {
  return semiconj_eval(f, kappa_bound(f), x, tol);
}

double semiconj_defect(const TorusEndomorphism& f, int m, double tol) {
  if (m < 1) throw PreconditionViolated("grid resolution must be positive");
  const SemiconjParams params = kappa_bound(f);
  const Mat2& a = f.linear_part_real();
  std::vector<double> rows(static_cast<std::size_t>(m), 0.0);
  parallel_for(rows.size(), [&](std::size_t i) {
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
      const Vec2 p(static_cast<double>(i) / m, static_cast<double>(j) / m);
      const Vec2 hp = semiconj_eval(f, params, p, tol);
      const Vec2 hfp = semiconj_eval(f, params, f.lift(p), tol);
      worst = std::max(worst, (hfp - a * hp).lpNorm<Eigen::Infinity>());
    }
    rows[i] = worst;
  });
  return *std::max_element(rows.begin(), rows.end());
}

bool orbit_stays_close(const TorusEndomorphism& f, const Vec2& p, const Vec2& y, double r, int depth) {
  Vec2 q = wrap_unit(p);
  Vec2 d = y - p;
  const Mat2& a = f.linear_part_real();
  for (int n = 0; n <= depth; ++n) {
    if (!(d.norm() < r)) return false;
    if (n == depth) break;
    const Vec2 moved = q + d;
    d = a * d + (f.displacement().value(moved) - f.displacement().value(q));
    q = f.step(q);
  }
  return true;
}

namespace {

int auto_depth(const SemiconjParams& params, double search_radius, double delta) {
  const int last = static_cast<int>(params.inverse_power_norms.size()) - 1;
  for (int n = 40; n <= last; ++n) {
    if (params.inverse_power_norms[static_cast<std::size_t>(n)] * 2.0 * search_radius < 0.01 * delta) return n;
  }
  return last;
}

FiberEstimate estimate_fiber_with(const TorusEndomorphism& f, const SemiconjParams& params, const Vec2& p,
                                  const FiberOptions& options, double delta) {
  const double kappa = params.kappa;
  const double r = options.radius > 0.0 ? options.radius : (kappa > 0.0 ? 3.0 * kappa : 0.1);
  if (!(r > 2.0 * kappa)) throw PreconditionViolated("fiber radius must exceed 2 kappa");
  const double search = options.search_radius > 0.0 ? options.search_radius : 2.0 * kappa + 0.02;
  const int depth = options.depth > 0 ? options.depth : auto_depth(params, search, delta);
  const int samples = std::max(options.samples, 16);

  FiberEstimate out;
  out.base = p;
  out.radius = r;
  out.depth = depth;
  out.witnesses.push_back(p);

  auto consider = [&](const Vec2& y) {
    if (orbit_stays_close(f, p, y, r, depth)) out.witnesses.push_back(y);
  };

  // Cross pattern along the axes and diagonals.
  const int per_ray = std::max(1, samples / 16);
  const Vec2 rays[4] = {Vec2(1, 0), Vec2(0, 1), Vec2(1, 1).normalized(), Vec2(1, -1).normalized()};
  for (const auto& ray : rays) {
    for (int k = 1; k <= per_ray; ++k) {
      const double t = search * k / per_ray;
      consider(p + t * ray);
      consider(p - t * ray);
    }
  }
  // Uniform disk samples.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int disk = samples - 8 * per_ray;
  for (int k = 0; k < disk; ++k) {
    const double rad = search * std::sqrt(unit(rng));
    const double ang = kTwoPi * unit(rng);
    consider(p + rad * Vec2(std::cos(ang), std::sin(ang)));
  }

  // Refine along the direction of the farthest survivor: dense line samples, then bisection of
  // the survival boundary on both sides.
  std::size_t far = 0;
  for (std::size_t i = 1; i < out.witnesses.size(); ++i) {
    if ((out.witnesses[i] - p).norm() > (out.witnesses[far] - p).norm()) far = i;
  }
  if (far != 0) {
    const Vec2 dir = (out.witnesses[far] - p).normalized();
    double reach[2] = {0.0, 0.0};
    for (int side = 0; side < 2; ++side) {
      const double sign = side == 0 ? 1.0 : -1.0;
      for (int k = 1; k <= samples / 2; ++k) {
        const double t = search * k / (samples / 2);
        const Vec2 y = p + sign * t * dir;
        if (orbit_stays_close(f, p, y, r, depth)) {
          out.witnesses.push_back(y);
          reach[side] = t;
        } else {
          break;
        }
      }
      double lo = reach[side], hi = std::min(search, reach[side] + search / (samples / 2));
      if (hi > lo) {
        for (int it = 0; it < 30; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (orbit_stays_close(f, p, p + sign * mid * dir, r, depth)) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        if (lo > reach[side]) out.witnesses.push_back(p + sign * lo * dir);
      }
    }
  }

  std::size_t best_i = 0, best_j = 0;
  for (std::size_t i = 0; i < out.witnesses.size(); ++i) {
    for (std::size_t j = i + 1; j < out.witnesses.size(); ++j) {
      const double d = (out.witnesses[i] - out.witnesses[j]).norm();
      if (d > out.diameter) {
        out.diameter = d;
        best_i = i;
        best_j = j;
      }
    }
  }
  if (out.diameter > 0.0) out.direction = canonical_direction(out.witnesses[best_j] - out.witnesses[best_i]);
  return out;
}

}  // namespace

FiberEstimate estimate_fiber(const TorusEndomorphism& f, const Vec2& p, const FiberOptions& options) {
  return estimate_fiber_with(f, kappa_bound(f), p, options, 0.005);
}

std::string to_string(DichotomyKind k) {
  return k == DichotomyKind::ConjugacyEvidence ? "ConjugacyEvidence" : "AnnulusCandidate";
}

DichotomyVerdict dichotomy_test(const TorusEndomorphism& f, int m, double delta, const FiberOptions& options) {
  const auto eig = integer_eigenvalues(f.linear_part());
  if (!eig) throw NoIntegerEigenvalues("dichotomy test needs integer eigenvalues");
  if (std::abs(eig->lambda1) == std::abs(eig->lambda2)) {
    throw EigenvalueTieError("dichotomy test needs |lambda1| > |lambda2|");
  }
  if (m < 1) throw PreconditionViolated("grid resolution must be positive");
  const SemiconjParams params = kappa_bound(f);

  DichotomyVerdict out;
  out.threshold = delta;
  out.fibers.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  parallel_for(out.fibers.size(), [&](std::size_t idx) {
    const Vec2 p(static_cast<double>(idx / static_cast<std::size_t>(m)) / m,
                 static_cast<double>(idx % static_cast<std::size_t>(m)) / m);
    FiberOptions local = options;
    local.seed = options.seed + idx;
    out.fibers[idx] = estimate_fiber_with(f, params, p, local, delta);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.fibers.size(); ++i) {
    if (out.fibers[i].diameter > out.fibers[best].diameter) best = i;
  }
  out.largest = out.fibers[best];
  out.depth = out.largest.depth;
  out.kind = out.largest.diameter > delta ? DichotomyKind::AnnulusCandidate : DichotomyKind::ConjugacyEvidence;
  return out;
}

void write_fiber_csv(std::ostream& out, const std::vector<FiberEstimate>& fibers) {
  out << "p_x,p_y,diameter,dir_x,dir_y\n";
  char buf[160];
  for (const auto& e : fibers) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", e.base[0], e.base[1], e.diameter, e.direction[0],
                  e.direction[1]);
    out << buf;
  }
}

}  // namespace torusendo
