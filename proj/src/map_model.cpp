#include "torusendo/map_model.hpp"

#include "torusendo/errors.hpp"
#include "torusendo/integer_linear.hpp"

#include <cmath>
#include <utility>

namespace torusendo {

namespace {

void validate_terms(const std::vector<FourierTerm>& terms) {
  for (const auto& t : terms) {
    if (!std::isfinite(t.coefficient)) throw ValidationError("non-finite Fourier coefficient");
    if (t.kind == TrigKind::Sin && t.wavevector[0] == 0 && t.wavevector[1] == 0) {
      throw ValidationError("sin term with zero wavevector");
    }
  }
}

double l1(const std::array<int, 2>& k) { return std::abs(k[0]) + std::abs(k[1]); }

}  // namespace

PeriodicField::PeriodicField(std::vector<FourierTerm> first, std::vector<FourierTerm> second)
    : components_{std::move(first), std::move(second)} {
  validate_terms(components_[0]);
  validate_terms(components_[1]);
}

Vec2 PeriodicField::value(const Vec2& x) const {
  const Vec2 r = wrap_unit(x);
  Vec2 out = Vec2::Zero();
  for (int i = 0; i < 2; ++i) {
    for (const auto& t : components_[static_cast<std::size_t>(i)]) {
      const double theta = kTwoPi * (t.wavevector[0] * r[0] + t.wavevector[1] * r[1]);
      out[i] += t.coefficient * (t.kind == TrigKind::Sin ? std::sin(theta) : std::cos(theta));
    }
  }
  return out;
}

Mat2 PeriodicField::jacobian(const Vec2& x) const {
  const Vec2 r = wrap_unit(x);
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < 2; ++i) {
    for (const auto& t : components_[static_cast<std::size_t>(i)]) {
      const double theta = kTwoPi * (t.wavevector[0] * r[0] + t.wavevector[1] * r[1]);
      const double d = t.kind == TrigKind::Sin ? std::cos(theta) : -std::sin(theta);
      const double s = kTwoPi * t.coefficient * d;
      out(i, 0) += s * t.wavevector[0];
      out(i, 1) += s * t.wavevector[1];
    }
  }
  return out;
}

PeriodicField PeriodicField::scaled(double c) const {
  PeriodicField out = *this;
  for (auto& comp : out.components_) {
    for (auto& t : comp) t.coefficient *= c;
  }
  return out;
}

TorusEndomorphism::TorusEndomorphism(const IntMat2& linear_part, PeriodicField displacement, std::string name)
    : linear_(linear_part),
      linear_real_(linear_part.cast<double>()),
      displacement_(std::move(displacement)),
      name_(std::move(name)) {
  if (std::abs(checked_det(linear_)) < 1) throw ValidationError("linear part must satisfy |det A| >= 1");
}

Vec2 TorusEndomorphism::lift(const Vec2& x) const { return linear_real_ * x + displacement_.value(x); }

Mat2 TorusEndomorphism::derivative(const Vec2& p) const { return linear_real_ + displacement_.jacobian(p); }

LiftPoint TorusEndomorphism::step(const LiftPoint& p) const {
  const Vec2 image = lift(p.frac);
  LiftPoint q = LiftPoint::from_plane(image);
  for (int i = 0; i < 2; ++i) {
    LiftInt acc = q.cell[static_cast<std::size_t>(i)];
    for (int j = 0; j < 2; ++j) {
      acc = checked_add(acc, checked_mul(static_cast<LiftInt>(linear_(i, j)), p.cell[static_cast<std::size_t>(j)]));
    }
    q.cell[static_cast<std::size_t>(i)] = acc;
  }
  return q;
}

bool TorusEndomorphism::operator==(const TorusEndomorphism& other) const {
  return linear_ == other.linear_ && displacement_ == other.displacement_ && name_ == other.name_;
}

Vec2 eval_lift(const TorusEndomorphism& f, const Vec2& x) { return f.lift(x); }

Mat2 eval_derivative(const TorusEndomorphism& f, const Vec2& p) { return f.derivative(p); }

double jacobian_det(const TorusEndomorphism& f, const Vec2& p) { return std::abs(f.derivative(p).determinant()); }

LinearPartEstimate extract_linear_part(const LiftEvaluator& lift) {
  const Vec2 origin = Vec2::Zero();
  const Vec2 base = lift(origin);
  LinearPartEstimate out;
  for (int j = 0; j < 2; ++j) {
    const Vec2 col = lift(Vec2::Unit(j)) - base;
    for (int i = 0; i < 2; ++i) {
      const double r = std::round(col[i]);
      out.matrix(i, j) = static_cast<std::int64_t>(r);
      out.residual = std::max(out.residual, std::abs(col[i] - r));
    }
  }
  if (!(out.residual <= 1e-6)) {
    throw ResidualTooLarge("lift is not equivariant under an integer matrix", out.residual);
  }
  return out;
}

LinearPartEstimate extract_linear_part(const TorusEndomorphism& f) {
  return extract_linear_part([&f](const Vec2& x) { return f.lift(x); });
}

Vec2 sup_displacement_components(const TorusEndomorphism& f) {
  Vec2 out = Vec2::Zero();
  for (int i = 0; i < 2; ++i) {
    for (const auto& t : f.displacement().component(i)) out[i] += std::abs(t.coefficient);
  }
  return out;
}

double sup_displacement_bound(const TorusEndomorphism& f) { return sup_displacement_components(f).maxCoeff(); }

double DerivativeBounds::lipschitz_inf() const { return sup_abs.rowwise().sum().maxCoeff(); }

DerivativeBounds derivative_bounds(const TorusEndomorphism& f) {
  DerivativeBounds b;
  b.sup_abs = f.linear_part_real().cwiseAbs();
  b.gradient = Mat2::Zero();
  for (int i = 0; i < 2; ++i) {
    for (const auto& t : f.displacement().component(i)) {
      const double c = std::abs(t.coefficient);
      for (int j = 0; j < 2; ++j) {
        const double kj = std::abs(t.wavevector[static_cast<std::size_t>(j)]);
        b.sup_abs(i, j) += c * kTwoPi * kj;
        b.gradient(i, j) += c * kTwoPi * kTwoPi * kj * l1(t.wavevector);
      }
    }
  }
  return b;
}

LipschitzBounds lipschitz_bounds(const TorusEndomorphism& f) {
  LipschitzBounds out;
  for (int i = 0; i < 2; ++i) {
    for (const auto& t : f.displacement().component(i)) {
      const double k = l1(t.wavevector);
      out.derivative += std::abs(t.coefficient) * kTwoPi * kTwoPi * k * k;
    }
  }
  const DerivativeBounds b = derivative_bounds(f);
  const Mat2& s = b.sup_abs;
  const Mat2& g = b.gradient;
  out.determinant = g(0, 0) * s(1, 1) + s(0, 0) * g(1, 1) + g(0, 1) * s(1, 0) + s(0, 1) * g(1, 0);
  return out;
}

Vec2 lift_preimage(const TorusEndomorphism& f, const Vec2& target) {
  constexpr int kMaxIterations = 60;
  const Mat2 a_inv = f.linear_part_real().inverse();
  Vec2 x = a_inv * target;
  Vec2 residual = f.lift(x) - target;
  double norm = residual.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < kMaxIterations && norm > 1e-14; ++it) {
    const Vec2 delta = f.derivative(x).partialPivLu().solve(residual);
    double damping = 1.0;
    Vec2 trial = x - delta;
    Vec2 trial_residual = f.lift(trial) - target;
    while (trial_residual.lpNorm<Eigen::Infinity>() > norm && damping > 1.0 / 1024) {
      damping *= 0.5;
      trial = x - damping * delta;
      trial_residual = f.lift(trial) - target;
    }
    if (trial_residual.lpNorm<Eigen::Infinity>() >= norm) break;  // no further progress in floating point
    x = trial;
    residual = trial_residual;
    norm = residual.lpNorm<Eigen::Infinity>();
  }
  if (!(norm <= 1e-10)) throw BranchDivergence("Newton iteration for a lift preimage did not converge");
  return x;
}

LiftPoint lift_preimage(const TorusEndomorphism& f, const LiftPoint& target) {
  // Write the integer part C = A w + s with w = floor(A^-1 C); solve f~(x) = s + frac, shift by w.
  const IntMat2& a = f.linear_part();
  const LiftInt det = checked_det(a);
  const IntMat2 adj = adjugate(a);
  std::array<LiftInt, 2> w{};
  for (int i = 0; i < 2; ++i) {
    LiftInt u = checked_add(checked_mul(static_cast<LiftInt>(adj(i, 0)), target.cell[0]),
                            checked_mul(static_cast<LiftInt>(adj(i, 1)), target.cell[1]));
    LiftInt q = u / det;
    if ((u % det != 0) && ((u < 0) != (det < 0))) --q;
    w[static_cast<std::size_t>(i)] = q;
  }
  Vec2 local = target.frac;
  for (int i = 0; i < 2; ++i) {
    LiftInt s = target.cell[static_cast<std::size_t>(i)];
    for (int j = 0; j < 2; ++j) s -= static_cast<LiftInt>(a(i, j)) * w[static_cast<std::size_t>(j)];
    local[i] += static_cast<double>(s);
  }
  const LiftPoint x = LiftPoint::from_plane(lift_preimage(f, local));
  LiftPoint out;
  out.frac = x.frac;
  out.cell = {checked_add(x.cell[0], w[0]), checked_add(x.cell[1], w[1])};
  return out;
}

std::vector<IntVec2> residue_system(const IntMat2& a) {
  const std::int64_t det = checked_det(a);
  if (det == 0) throw PreconditionViolated("singular linear part");
  const IntMat2 adj = adjugate(a);
  std::int64_t lo[2], hi[2];
  for (int i = 0; i < 2; ++i) {
    const std::int64_t corners[4] = {0, a(i, 0), a(i, 1), checked_add(a(i, 0), a(i, 1))};
    lo[i] = *std::min_element(corners, corners + 4);
    hi[i] = *std::max_element(corners, corners + 4);
  }
  std::vector<IntVec2> out;
  for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
    for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
      const IntVec2 u = checked_product(adj, IntVec2(x, y));
      bool inside = true;
      for (int i = 0; i < 2; ++i) {
        inside = inside && (det > 0 ? (u[i] >= 0 && u[i] < det) : (u[i] <= 0 && u[i] > det));
      }
      if (inside) out.emplace_back(x, y);
    }
  }
  if (static_cast<std::int64_t>(out.size()) != std::abs(det)) throw Error("residue_system: wrong count");
  return out;
}

std::vector<Vec2> preimages(const TorusEndomorphism& f, const Vec2& q) {
  const Vec2 base = wrap_unit(q);
  std::vector<Vec2> out;
  for (const auto& w : residue_system(f.linear_part())) {
    const Vec2 x = wrap_unit(lift_preimage(f, Vec2(base + w.cast<double>())));
    if (torus_distance(f.step(x), base) > 1e-10) throw BranchDivergence("preimage residual too large");
    for (const auto& y : out) {
      if (torus_distance(x, y) <= 1e-6) throw BranchDivergence("two branches converged to the same preimage");
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace torusendo
