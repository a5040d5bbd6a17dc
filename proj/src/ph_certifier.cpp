#include "torusendo/ph_certifier.hpp"

#include "torusendo/errors.hpp"
#include "torusendo/integer_linear.hpp"
#include "torusendo/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <limits>

namespace torusendo {

std::pair<Vec2, Vec2> ConeSpec::boundary_rays() const {
  Vec2 up, down;
  up[main_axis()] = 1.0;
  up[cross_axis()] = slope;
  down[main_axis()] = 1.0;
  down[cross_axis()] = -slope;
  return {up, down};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified:
      return "Certified";
    case Verdict::Failed:
      return "Failed";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

double operator_norm(const Mat2& m) {
  const double fro2 = m.squaredNorm();
  const double det = m.determinant();
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

double min_expansion_on_cone(const Mat2& m, const ConeSpec& cone) {
  const Mat2 gram = m.transpose() * m;
  auto ratio = [&](const Vec2& v) { return v.dot(gram * v) / v.squaredNorm(); };
  const auto [up, down] = cone.boundary_rays();
  double best = std::min(ratio(up), ratio(down));
  Eigen::SelfAdjointEigenSolver<Mat2> es;
  es.computeDirect(gram);
  const Vec2 weakest = es.eigenvectors().col(0);
  if (cone.contains(weakest)) best = std::min(best, std::max(0.0, es.eigenvalues()[0]));
  return std::sqrt(std::max(0.0, best));
}

namespace {

using Clock = std::chrono::steady_clock;

// Margins at one cell: raw is the pointwise value at the centre, rigorous subtracts the
// Lipschitz slack over the whole cell.
struct CellMargin {
  double raw = std::numeric_limits<double>::infinity();
  double rigorous = std::numeric_limits<double>::infinity();
  double cone_raw = std::numeric_limits<double>::infinity();
  double expansion_raw = std::numeric_limits<double>::infinity();
};

struct ConeContext {
  const TorusEndomorphism& f;
  ConeSpec cone;
  int iterate;
  double expansion;
  DerivativeBounds bounds;
  double row_lipschitz;
};

CellMargin cone_cell(const ConeContext& ctx, const Vec2& center, double half_side) {
  Mat2 product = Mat2::Identity();
  double norm_product = 1.0;
  double perturbed_product = 1.0;
  Vec2 p = center;
  double h = half_side;
  for (int i = 0; i < ctx.iterate; ++i) {
    const Mat2 d = ctx.f.derivative(p);
    const double e = (ctx.bounds.gradient * h).norm();  // Frobenius bound on |Df_q - Df_p|_2
    const double dn = operator_norm(d);
    norm_product *= dn;
    perturbed_product *= dn + e;
    product = d * product;
    p = ctx.f.step(p);
    h *= ctx.row_lipschitz;
  }
  const double slack_matrix = perturbed_product - norm_product;

  CellMargin out;
  const auto [up, down] = ctx.cone.boundary_rays();
  const double ray_norm = up.norm();
  const int main = ctx.cone.main_axis(), cross = ctx.cone.cross_axis();
  const Vec2 iu = product * up, id = product * down;
  const double eps = slack_matrix * ray_norm;

  double raw_slope = 0.0, worst_slope = 0.0;
  bool same_side = (iu[main] > 0) == (id[main] > 0) && iu[main] != 0.0 && id[main] != 0.0;
  for (const Vec2* u : {&iu, &id}) {
    const double m = std::abs((*u)[main]);
    const double c = std::abs((*u)[cross]);
    raw_slope = std::max(raw_slope, m > 0 ? c / m : std::numeric_limits<double>::infinity());
    worst_slope = std::max(worst_slope, m > eps ? (c + eps) / (m - eps) : std::numeric_limits<double>::infinity());
  }
  const double s = ctx.cone.slope;
  out.cone_raw = same_side ? s - raw_slope : -std::numeric_limits<double>::infinity();
  const double cone_rigorous = same_side ? s - worst_slope : -std::numeric_limits<double>::infinity();

  out.expansion_raw = min_expansion_on_cone(product, ctx.cone) - ctx.expansion;
  const double expansion_rigorous = out.expansion_raw - slack_matrix;

  out.raw = std::min(out.cone_raw, out.expansion_raw);
  out.rigorous = std::min(cone_rigorous, expansion_rigorous);
  return out;
}

struct VolumeContext {
  const TorusEndomorphism& f;
  int n;
  double threshold;
  DerivativeBounds bounds;
  double row_lipschitz;
};

CellMargin volume_cell(const VolumeContext& ctx, const Vec2& center, double half_side) {
  double det_product = 1.0;
  double lower_product = 1.0;
  Vec2 p = center;
  double h = half_side;
  for (int i = 0; i < ctx.n; ++i) {
    const Mat2 d = ctx.f.derivative(p);
    const Mat2 e = ctx.bounds.gradient * h;
    // det(D + E) - det(D) = a Ed + d Ea + Ea Ed - b Ec - c Eb - Eb Ec
    const double slack = std::abs(d(0, 0)) * e(1, 1) + std::abs(d(1, 1)) * e(0, 0) + e(0, 0) * e(1, 1) +
                         std::abs(d(0, 1)) * e(1, 0) + std::abs(d(1, 0)) * e(0, 1) + e(0, 1) * e(1, 0);
    const double det = std::abs(d.determinant());
    det_product *= det;
    lower_product *= std::max(0.0, det - slack);
    p = ctx.f.step(p);
    h *= ctx.row_lipschitz;
  }
  CellMargin out;
  out.raw = det_product - ctx.threshold;
  out.rigorous = lower_product - ctx.threshold;
  out.expansion_raw = out.raw;
  return out;
}

struct GridOutcome {
  double min_raw = std::numeric_limits<double>::infinity();
  double min_rigorous = std::numeric_limits<double>::infinity();
  double max_slack = 0.0;
  double min_cone_raw = std::numeric_limits<double>::infinity();
  double min_expansion_raw = std::numeric_limits<double>::infinity();
  Vec2 raw_argmin = Vec2::Zero();
  Vec2 rigorous_argmin = Vec2::Zero();
};

template <typename CellFn>
GridOutcome scan_grid(int m, const CellFn& cell) {
  const double side = 1.0 / m;
  std::vector<GridOutcome> rows(static_cast<std::size_t>(m));
  parallel_for(rows.size(), [&](std::size_t i) {
    GridOutcome& row = rows[i];
    for (int j = 0; j < m; ++j) {
      const Vec2 center((static_cast<double>(i) + 0.5) * side, (j + 0.5) * side);
      const CellMargin c = cell(center, 0.5 * side);
      if (c.raw < row.min_raw) {
        row.min_raw = c.raw;
        row.raw_argmin = center;
      }
      if (c.rigorous < row.min_rigorous) {
        row.min_rigorous = c.rigorous;
        row.rigorous_argmin = center;
      }
      if (std::isfinite(c.raw) && std::isfinite(c.rigorous)) row.max_slack = std::max(row.max_slack, c.raw - c.rigorous);
      row.min_cone_raw = std::min(row.min_cone_raw, c.cone_raw);
      row.min_expansion_raw = std::min(row.min_expansion_raw, c.expansion_raw);
    }
  });
  GridOutcome out;
  for (const auto& row : rows) {
    if (row.min_raw < out.min_raw) {
      out.min_raw = row.min_raw;
      out.raw_argmin = row.raw_argmin;
    }
    if (row.min_rigorous < out.min_rigorous) {
      out.min_rigorous = row.min_rigorous;
      out.rigorous_argmin = row.rigorous_argmin;
    }
    out.max_slack = std::max(out.max_slack, row.max_slack);
    out.min_cone_raw = std::min(out.min_cone_raw, row.min_cone_raw);
    out.min_expansion_raw = std::min(out.min_expansion_raw, row.min_expansion_raw);
  }
  return out;
}

template <typename CellFn>
Certificate run_with_refinement(Certificate cert, const GridSpec& grid, const CellFn& cell, bool cone_details) {
  const auto start = Clock::now();
  if (grid.resolution < 2) throw PreconditionViolated("grid resolution must be at least 2");
  int m = grid.resolution;
  while (true) {
    cert.resolutions_tried.push_back(m);
    const GridOutcome g = scan_grid(m, cell);
    cert.grid.resolution = m;
    cert.min_center_margin = g.min_raw;
    cert.worst_margin = g.min_rigorous;
    cert.slack_used = g.max_slack;
    cert.details.clear();
    if (cone_details) {
      cert.details.emplace_back("min_cone_slope_margin", g.min_cone_raw);
      cert.details.emplace_back("min_expansion_margin", g.min_expansion_raw);
    }
    if (!(g.min_raw > 0.0)) {
      cert.verdict = Verdict::Failed;
      cert.witness = g.raw_argmin;
      break;
    }
    cert.witness = g.rigorous_argmin;
    if (g.min_rigorous > 0.0) {
      cert.verdict = Verdict::Certified;
      break;
    }
    cert.verdict = Verdict::Inconclusive;
    if (2 * static_cast<long>(m) > grid.max_resolution) break;
    m *= 2;
  }
  cert.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return cert;
}

}  // namespace

double pointwise_cone_margin(const TorusEndomorphism& f, const ConeSpec& cone, int iterate, double expansion,
                             const Vec2& p) {
  const ConeContext ctx{f, cone, iterate, expansion, derivative_bounds(f), 0.0};
  return cone_cell(ctx, wrap_unit(p), 0.0).raw;
}

double pointwise_volume_margin(const TorusEndomorphism& f, int n, const Vec2& p) {
  const auto eig = integer_eigenvalues(f.linear_part());
  if (!eig) throw NoIntegerEigenvalues("volume expansion needs integer eigenvalues");
  const VolumeContext ctx{f, n, std::pow(std::abs(static_cast<double>(eig->lambda1)), n), derivative_bounds(f), 0.0};
  return volume_cell(ctx, wrap_unit(p), 0.0).raw;
}

Certificate certify_cone_invariance(const TorusEndomorphism& f, const ConeSpec& cone, const GridSpec& grid) {
  if (!(cone.slope > 0.0) || !std::isfinite(cone.slope)) throw PreconditionViolated("cone slope must be positive");
  if (grid.iterate < 1) throw PreconditionViolated("iterate must be at least 1");
  if (!(grid.expansion > 1.0)) throw PreconditionViolated("expansion target must exceed 1");
  const DerivativeBounds bounds = derivative_bounds(f);
  const ConeContext ctx{f, cone, grid.iterate, grid.expansion, bounds, bounds.lipschitz_inf()};
  Certificate cert;
  cert.condition = "cone-invariance";
  cert.grid = grid;
  cert.threshold = grid.expansion;
  return run_with_refinement(
      cert, grid, [&ctx](const Vec2& c, double h) { return cone_cell(ctx, c, h); }, true);
}

Certificate certify_strong_volume_expansion(const TorusEndomorphism& f, const GridSpec& grid, int n) {
  if (n < 1) throw PreconditionViolated("iterate must be at least 1");
  const auto eig = integer_eigenvalues(f.linear_part());
  if (!eig) throw NoIntegerEigenvalues("volume expansion needs integer eigenvalues");
  const DerivativeBounds bounds = derivative_bounds(f);
  const double threshold = std::pow(std::abs(static_cast<double>(eig->lambda1)), n);
  const VolumeContext ctx{f, n, threshold, bounds, bounds.lipschitz_inf()};
  Certificate cert;
  cert.condition = "strong-volume-expansion";
  cert.grid = grid;
  cert.grid.iterate = n;
  cert.threshold = threshold;
  return run_with_refinement(
      cert, cert.grid, [&ctx](const Vec2& c, double h) { return volume_cell(ctx, c, h); }, false);
}

}  // namespace torusendo
