#include "torusendo/transitivity_lab.hpp"

#include "torusendo/errors.hpp"
#include "torusendo/integer_linear.hpp"
#include "torusendo/parallel.hpp"
#include "torusendo/ph_certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace torusendo {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t to_int64(LiftInt v) {
  if (v > static_cast<LiftInt>(std::numeric_limits<std::int64_t>::max()) ||
      v < static_cast<LiftInt>(std::numeric_limits<std::int64_t>::min())) {
    throw OverflowError("cell index exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

void normalize(RegionCover& r) {
  if (r.on_torus) {
    const std::int64_t n = std::int64_t{1} << r.level;
    for (auto& c : r.cells) {
      c.i = floor_mod(c.i, n);
      c.j = floor_mod(c.j, n);
    }
  }
  std::sort(r.cells.begin(), r.cells.end());
  r.cells.erase(std::unique(r.cells.begin(), r.cells.end()), r.cells.end());
}

// Candidate cell indices along one axis: index k, plus k-1 when the coordinate sits on an edge.
struct AxisIndex {
  std::int64_t index;
  bool on_edge;
};

AxisIndex axis_index(LiftInt cell, double frac, int level) {
  const double scaled = std::ldexp(frac, level);
  const double fl = std::floor(scaled);
  const LiftInt whole = checked_add(checked_mul(cell, static_cast<LiftInt>(std::int64_t{1} << level)),
                                    static_cast<LiftInt>(fl));
  return {to_int64(whole), scaled == fl};
}

bool has_cell(const RegionCover& r, std::int64_t i, std::int64_t j) {
  if (r.on_torus) {
    const std::int64_t n = std::int64_t{1} << r.level;
    i = floor_mod(i, n);
    j = floor_mod(j, n);
  }
  return std::binary_search(r.cells.begin(), r.cells.end(), DyadicCell{r.level, i, j});
}

}  // namespace

bool RegionCover::covers(const LiftPoint& x) const {
  const AxisIndex ax = axis_index(x.cell[0], x.frac[0], level);
  const AxisIndex ay = axis_index(x.cell[1], x.frac[1], level);
  for (int di = 0; di <= (ax.on_edge ? 1 : 0); ++di) {
    for (int dj = 0; dj <= (ay.on_edge ? 1 : 0); ++dj) {
      if (has_cell(*this, ax.index - di, ay.index - dj)) return true;
    }
  }
  return false;
}

bool RegionCover::covers(const Vec2& x) const { return covers(LiftPoint::from_plane(x)); }

double RegionCover::area() const {
  return static_cast<double>(cells.size()) * std::ldexp(1.0, -2 * level);
}

RegionCover box_region(const Vec2& lo, const Vec2& hi, int level) {
  if (level < 0 || level > 30) throw PreconditionViolated("level out of range");
  const double scale = std::ldexp(1.0, level);
  RegionCover r;
  r.level = level;
  const auto i0 = static_cast<std::int64_t>(std::ceil(lo[0] * scale));
  const auto i1 = static_cast<std::int64_t>(std::floor(hi[0] * scale));
  const auto j0 = static_cast<std::int64_t>(std::ceil(lo[1] * scale));
  const auto j1 = static_cast<std::int64_t>(std::floor(hi[1] * scale));
  for (std::int64_t i = i0; i < i1; ++i) {
    for (std::int64_t j = j0; j < j1; ++j) r.cells.push_back({level, i, j});
  }
  if (r.cells.empty()) throw PreconditionViolated("box contains no cell at this level");
  return r;
}

RegionCover ball_region(const Vec2& center, double radius, int level) {
  if (!(radius > 0.0)) throw PreconditionViolated("radius must be positive");
  if (level < 0 || level > 30) throw PreconditionViolated("level out of range");
  const double side = std::ldexp(1.0, -level);
  RegionCover r;
  r.level = level;
  const auto i0 = static_cast<std::int64_t>(std::floor((center[0] - radius) / side));
  const auto i1 = static_cast<std::int64_t>(std::ceil((center[0] + radius) / side));
  const auto j0 = static_cast<std::int64_t>(std::floor((center[1] - radius) / side));
  const auto j1 = static_cast<std::int64_t>(std::ceil((center[1] + radius) / side));
  for (std::int64_t i = i0; i <= i1; ++i) {
    for (std::int64_t j = j0; j <= j1; ++j) {
      const DyadicCell c{level, i, j};
      const Vec2 lo = c.lower();
      // farthest corner from the centre
      const double dx = std::max(std::abs(lo[0] - center[0]), std::abs(lo[0] + side - center[0]));
      const double dy = std::max(std::abs(lo[1] - center[1]), std::abs(lo[1] + side - center[1]));
      if (std::hypot(dx, dy) < radius) r.cells.push_back(c);
    }
  }
  if (r.cells.empty()) throw PreconditionViolated("disc contains no cell at this level");
  return r;
}

RegionCover with_witnesses(const RegionCover& region, int density) {
  if (density < 1) throw PreconditionViolated("density must be positive");
  RegionCover out = region;
  out.kind = RegionKind::InnerWitnessSet;
  out.iterate = 0;
  out.witnesses.clear();
  out.witnesses.reserve(region.cells.size() * static_cast<std::size_t>(density) * static_cast<std::size_t>(density));
  for (const auto& c : region.cells) {
    const Vec2 lo = c.lower();
    const double step = c.side() / density;
    for (int a = 0; a < density; ++a) {
      for (int b = 0; b < density; ++b) {
        const Vec2 s = lo + Vec2((a + 0.5) * step, (b + 0.5) * step);
        out.witnesses.push_back({LiftPoint::from_plane(s), s});
      }
    }
  }
  return out;
}

namespace {

void advance_witnesses(const TorusEndomorphism& f, std::vector<Witness>& witnesses, int n) {
  if (n <= 0) return;
  parallel_for(witnesses.size(), [&](std::size_t i) {
    for (int k = 0; k < n; ++k) witnesses[i].point = f.step(witnesses[i].point);
  });
}

RegionCover outer_step(const TorusEndomorphism& f, const RegionCover& r, const DerivativeBounds& bounds,
                       std::size_t budget) {
  const double side = std::ldexp(1.0, -r.level);
  const double scale = std::ldexp(1.0, r.level);
  const bool linear = f.displacement().empty();
  const Vec2 rows = bounds.sup_abs.rowwise().sum();
  RegionCover out = r;
  out.cells.clear();
  auto compact = [&] {
    normalize(out);
    if (out.cells.size() > budget) throw CellBlowup("outer cover exceeds the cell budget");
  };
  for (const auto& cell : r.cells) {
    const Vec2 image = f.lift(cell.center());
    std::int64_t lo[2], hi[2];
    for (int i = 0; i < 2; ++i) {
      const double pad = linear ? 0.0 : 1e-12 * (1.0 + std::abs(image[i]));
      const double w = rows[i] * 0.5 * side + pad;
      lo[i] = static_cast<std::int64_t>(std::floor((image[i] - w) * scale));
      hi[i] = static_cast<std::int64_t>(std::ceil((image[i] + w) * scale));
    }
    if (static_cast<double>(hi[0] - lo[0]) * static_cast<double>(hi[1] - lo[1]) > static_cast<double>(budget)) {
      throw CellBlowup("outer cover exceeds the cell budget");
    }
    for (std::int64_t i = lo[0]; i < hi[0]; ++i) {
      for (std::int64_t j = lo[1]; j < hi[1]; ++j) out.cells.push_back({r.level, i, j});
    }
    if (out.cells.size() > 2 * budget) compact();
  }
  out.iterate = r.iterate + 1;
  compact();
  return out;
}

}  // namespace

RegionCover iterate_region(const TorusEndomorphism& f, const RegionCover& region, int n,
                           const IterateOptions& options) {
  if (n < 0) throw PreconditionViolated("iterate must be nonnegative");
  RegionCover out = region;
  if (n == 0) return out;
  if (region.kind == RegionKind::InnerWitnessSet) {
    advance_witnesses(f, out.witnesses, n);
    out.iterate += n;
    return out;
  }
  normalize(out);
  const DerivativeBounds bounds = derivative_bounds(f);
  for (int k = 0; k < n; ++k) out = outer_step(f, out, bounds, options.cell_budget);
  return out;
}

void write_witness_csv(std::ostream& out, const RegionCover& region) {
  out << "n,x,y,lift_i,lift_j\n";
  char buf[64];
  for (const auto& w : region.witnesses) {
    out << region.iterate;
    for (int i = 0; i < 2; ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", w.point.frac[i]);
      out << buf;
    }
    out << ',' << to_string(w.point.cell[0]) << ',' << to_string(w.point.cell[1]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Searches over witness sets
// ---------------------------------------------------------------------------

namespace {

// Witness sets of one region at increasing densities, advanced lazily.
class WitnessLadder {
 public:
  WitnessLadder(const TorusEndomorphism& f, const RegionCover& region, const SearchOptions& options) : f_(f) {
    if (region.cells.empty()) throw PreconditionViolated("region is empty");
    RegionCover base = region;
    base.witnesses.clear();
    base.kind = RegionKind::OuterCover;
    int d = std::max(1, options.density);
    do {
      sets_.push_back(with_witnesses(base, d));
      densities_.push_back(d);
      d *= 2;
    } while (region.cells.size() * static_cast<std::size_t>(d) * static_cast<std::size_t>(d) <=
             options.witness_budget);
  }

  std::size_t levels() const { return sets_.size(); }
  int density(std::size_t level) const { return densities_[level]; }

  const RegionCover& at(std::size_t level, int n) {
    RegionCover& s = sets_[level];
    advance_witnesses(f_, s.witnesses, n - s.iterate);
    s.iterate = n;
    return s;
  }

 private:
  const TorusEndomorphism& f_;
  std::vector<RegionCover> sets_;
  std::vector<int> densities_;
};

constexpr int kBins = 64;

std::int64_t torus_bin(double frac) { return std::min<std::int64_t>(kBins - 1, static_cast<std::int64_t>(frac * kBins)); }

struct Candidate {
  std::size_t witness;
  IntVec2 shift;
  double error;
};

LiftPoint shifted(const LiftPoint& p, const IntVec2& v) {
  LiftPoint q = p;
  q.cell[0] = checked_add(q.cell[0], static_cast<LiftInt>(v[0]));
  q.cell[1] = checked_add(q.cell[1], static_cast<LiftInt>(v[1]));
  return q;
}

// Pull f~^n(s) + shift back n steps; accept when the start lies in the region.
std::optional<EssentialPair> refine(const TorusEndomorphism& f, const RegionCover& set, const Candidate& c, int axis,
                                    double tolerance) {
  const Witness& w = set.witnesses[c.witness];
  const LiftPoint target = shifted(w.point, c.shift);
  LiftPoint x = target;
  double chain = 0.0;
  try {
    for (int k = 0; k < set.iterate; ++k) {
      const LiftPoint prev = lift_preimage(f, x);
      chain = std::max(chain, difference(f.step(prev), x).lpNorm<Eigen::Infinity>());
      x = prev;
    }
  } catch (const BranchDivergence&) {
    return std::nullopt;
  } catch (const OverflowError&) {
    return std::nullopt;
  }
  if (!(chain <= tolerance)) return std::nullopt;
  if (!set.covers(x)) return std::nullopt;
  const Vec2 d = difference(target, w.point);
  const Vec2 rounded(std::round(d[0]), std::round(d[1]));
  const double residual = (d - rounded).lpNorm<Eigen::Infinity>();
  if (!(residual <= tolerance)) return std::nullopt;
  if (rounded[1 - axis] != 0.0 || rounded[axis] == 0.0) return std::nullopt;
  EssentialPair pair;
  pair.first = w.point;
  pair.second = target;
  pair.first_source = w.source;
  pair.second_source = x.to_plane();
  pair.axis = axis;
  pair.multiple = static_cast<std::int64_t>(rounded[axis]);
  pair.displacement_residual = residual;
  pair.chain_residual = chain;
  return pair;
}

std::optional<EssentialPair> try_candidates(const TorusEndomorphism& f, const RegionCover& set,
                                            std::vector<Candidate> cands, int axis, const SearchOptions& options) {
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.error < b.error; });
  const std::size_t limit = std::min(cands.size(), static_cast<std::size_t>(std::max(1, options.candidates_per_axis)));
  for (std::size_t i = 0; i < limit; ++i) {
    if (auto p = refine(f, set, cands[i], axis, options.tolerance)) return p;
  }
  return std::nullopt;
}

// Witness pairs whose lift difference is close to a nonzero multiple of e_axis: grouped by the
// torus bin along the axis and the lift bin across it, sorted by the integer cell along the axis
// so that pairs from the same cell are skipped.
std::array<std::vector<Candidate>, 2> lattice_scan(const RegionCover& set) {
  struct Entry {
    std::int64_t cell;
    std::size_t index;
  };
  struct KeyHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
      return std::hash<std::int64_t>()(k.first * 1000003 + k.second);
    }
  };
  constexpr int kPerWitness = 2;
  std::array<std::vector<Candidate>, 2> out;
  const double window = 2.0 / kBins;
  for (int axis = 0; axis < 2; ++axis) {
    const int other = 1 - axis;
    std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<Entry>, KeyHash> groups;
    std::vector<std::pair<std::int64_t, std::int64_t>> keys(set.witnesses.size());
    for (std::size_t i = 0; i < set.witnesses.size(); ++i) {
      const LiftPoint& p = set.witnesses[i].point;
      const std::int64_t across = to_int64(checked_add(checked_mul(p.cell[other], LiftInt{kBins}),
                                                        static_cast<LiftInt>(torus_bin(p.frac[other]))));
      keys[i] = {torus_bin(p.frac[axis]), across};
      groups[keys[i]].push_back({to_int64(p.cell[axis]), i});
    }
    for (auto& [key, entries] : groups) {
      std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
        return x.cell != y.cell ? x.cell < y.cell : x.index < y.index;
      });
    }
    for (std::size_t a = 0; a < set.witnesses.size(); ++a) {
      const LiftPoint& pa = set.witnesses[a].point;
      const std::int64_t own = to_int64(pa.cell[axis]);
      int found = 0;
      for (std::int64_t dm = -1; dm <= 1 && found < kPerWitness; ++dm) {
        for (std::int64_t dc = -1; dc <= 1 && found < kPerWitness; ++dc) {
          const auto it = groups.find({floor_mod(keys[a].first + dm, kBins), keys[a].second + dc});
          if (it == groups.end()) continue;
          const auto& entries = it->second;
          const auto same = std::equal_range(entries.begin(), entries.end(), Entry{own, 0},
                                             [](const Entry& x, const Entry& y) { return x.cell < y.cell; });
          for (auto e = entries.begin(); e != entries.end() && found < kPerWitness; ++e) {
            if (e == same.first) {
              e = same.second;
              if (e == entries.end()) break;
            }
            const Vec2 d = difference(set.witnesses[e->index].point, pa);
            const Vec2 r(std::round(d[0]), std::round(d[1]));
            const double err = (d - r).lpNorm<Eigen::Infinity>();
            if (err >= window || r[other] != 0.0 || r[axis] == 0.0) continue;
            out[static_cast<std::size_t>(axis)].push_back(
                {a, IntVec2(static_cast<std::int64_t>(r[0]), static_cast<std::int64_t>(r[1])), err});
            ++found;
          }
        }
      }
    }
  }
  return out;
}

// Bins occupied by witnesses form B; a Blichfeldt translate gives points of B differing by
// integer vectors, and pigeonhole_pairs picks a row pair and a column pair among them.
std::array<std::vector<Candidate>, 2> blichfeldt_scan(const RegionCover& set) {
  std::array<std::vector<Candidate>, 2> out;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> occupied;
  for (std::size_t i = 0; i < set.witnesses.size(); ++i) {
    const LiftPoint& p = set.witnesses[i].point;
    const std::int64_t x = to_int64(checked_add(checked_mul(p.cell[0], LiftInt{kBins}), static_cast<LiftInt>(torus_bin(p.frac[0]))));
    const std::int64_t y = to_int64(checked_add(checked_mul(p.cell[1], LiftInt{kBins}), static_cast<LiftInt>(torus_bin(p.frac[1]))));
    occupied.emplace(std::make_pair(x, y), i);
  }
  constexpr std::size_t kMaxBins = 5 * kBins * kBins;
  if (occupied.size() <= static_cast<std::size_t>(kBins * kBins) || occupied.size() > kMaxBins) return out;
  std::vector<RationalRect> rects;
  rects.reserve(occupied.size());
  for (const auto& [key, idx] : occupied) {
    rects.push_back({Rational(key.first, kBins), Rational(key.first + 1, kBins), Rational(key.second, kBins),
                     Rational(key.second + 1, kBins)});
  }
  const CellSet b(std::move(rects));
  // area(B) = bins / 4096 must exceed k
  const int k = std::min<int>(4, static_cast<int>((occupied.size() - 1) / (kBins * kBins)));
  if (k < 1) return out;
  const BlichfeldtResult bl = blichfeldt_translate(b, k);

  std::vector<IntVec2> lattice;
  std::vector<std::size_t> owners;
  for (const auto& p : bl.points) {
    const Rational lx = p.x + bl.translate.x, ly = p.y + bl.translate.y;
    lattice.emplace_back(lx.numerator(), ly.numerator());
    const auto bx = static_cast<std::int64_t>(std::floor(boost::rational_cast<double>(p.x) * kBins));
    const auto by = static_cast<std::int64_t>(std::floor(boost::rational_cast<double>(p.y) * kBins));
    const auto it = occupied.find({bx, by});
    owners.push_back(it == occupied.end() ? set.witnesses.size() : it->second);
  }
  std::int64_t min_x = lattice[0][0], min_y = lattice[0][1], max_x = min_x, max_y = min_y;
  for (const auto& v : lattice) {
    min_x = std::min(min_x, v[0]);
    max_x = std::max(max_x, v[0]);
    min_y = std::min(min_y, v[1]);
    max_y = std::max(max_y, v[1]);
  }
  const std::int64_t l = std::max(max_x - min_x, max_y - min_y) + 1;
  std::vector<std::pair<std::size_t, std::size_t>> rows, columns;
  if (static_cast<std::int64_t>(lattice.size()) >= l + 1) {
    std::vector<IntVec2> shifted_pts;
    for (const auto& v : lattice) shifted_pts.emplace_back(v[0] - min_x + 1, v[1] - min_y + 1);
    try {
      const PigeonholePairs pp = pigeonhole_pairs(shifted_pts, l);
      auto index_of = [&](const IntVec2& v) {
        return static_cast<std::size_t>(std::find(shifted_pts.begin(), shifted_pts.end(), v) - shifted_pts.begin());
      };
      rows.emplace_back(index_of(pp.row_pair[0]), index_of(pp.row_pair[1]));
      columns.emplace_back(index_of(pp.column_pair[0]), index_of(pp.column_pair[1]));
    } catch (const Error&) {
    }
  }
  for (std::size_t a = 0; a < lattice.size(); ++a) {
    for (std::size_t c = a + 1; c < lattice.size(); ++c) {
      if (lattice[a][1] == lattice[c][1]) rows.emplace_back(a, c);
      if (lattice[a][0] == lattice[c][0]) columns.emplace_back(a, c);
    }
  }
  for (int axis = 0; axis < 2; ++axis) {
    for (const auto& [a, c] : axis == 0 ? rows : columns) {
      if (owners[a] >= set.witnesses.size()) continue;
      const IntVec2 shift = lattice[c] - lattice[a];
      out[static_cast<std::size_t>(axis)].push_back({owners[a], shift, 0.0});
    }
  }
  return out;
}

}  // namespace

std::optional<EssentialityReport> doubly_essential_witness(const TorusEndomorphism& f, const RegionCover& region,
                                                           int n_max, const SearchOptions& options) {
  if (n_max < 0) throw PreconditionViolated("n_max must be nonnegative");
  WitnessLadder ladder(f, region, options);
  for (int n = 0; n <= n_max; ++n) {
    for (std::size_t level = 0; level < ladder.levels(); ++level) {
      RegionCover set = ladder.at(level, n);
      set.cells = region.cells;
      set.level = region.level;
      set.on_torus = false;
      std::sort(set.cells.begin(), set.cells.end());
      std::array<std::optional<EssentialPair>, 2> found;
      std::string route = "lattice-scan";
      const auto direct = lattice_scan(set);
      for (int axis = 0; axis < 2; ++axis) {
        found[static_cast<std::size_t>(axis)] = try_candidates(f, set, direct[static_cast<std::size_t>(axis)], axis, options);
      }
      if (!found[0] || !found[1]) {
        const auto via = blichfeldt_scan(set);
        for (int axis = 0; axis < 2; ++axis) {
          if (found[static_cast<std::size_t>(axis)]) continue;
          found[static_cast<std::size_t>(axis)] = try_candidates(f, set, via[static_cast<std::size_t>(axis)], axis, options);
          if (found[static_cast<std::size_t>(axis)]) route = "blichfeldt";
        }
      }
      if (found[0] && found[1]) {
        EssentialityReport rep;
        rep.iterate = n;
        rep.horizontal = *found[0];
        rep.vertical = *found[1];
        rep.density = ladder.density(level);
        rep.route = route;
        return rep;
      }
    }
  }
  return std::nullopt;
}

EssentialBound essential_iterate_bound(double kappa, double leb, const IntMat2& a, double lambda) {
  if (!(kappa >= 0.0)) throw PreconditionViolated("kappa must be nonnegative");
  if (!(leb > 0.0)) throw PreconditionViolated("measure must be positive");
  if (!(lambda > spectral_radius(a))) throw NoFiniteN("volume growth does not exceed the spectral radius");
  const Mat2 step = a.cast<double>() / lambda;
  Mat2 scaled = Mat2::Identity();
  double inv_pow = 1.0;
  constexpr int kMaxIterate = 1000000;
  for (int n = 1; n <= kMaxIterate; ++n) {
    scaled = scaled * step;
    inv_pow /= lambda;
    const double lhs = 2.0 * (1.0 + kappa) * operator_norm(scaled) + 2.0 * kappa * inv_pow;
    if (lhs < leb) return {n, lhs, leb};
  }
  throw NoFiniteN("no iterate below the search limit");
}

std::optional<CoveringReport> covering_witness(const TorusEndomorphism& f, const RegionCover& region, int m,
                                               int n_max, const SearchOptions& options) {
  if (m < 1) throw PreconditionViolated("resolution must be positive");
  if (n_max < 0) throw PreconditionViolated("n_max must be nonnegative");
  WitnessLadder ladder(f, region, options);
  const auto cells = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  std::vector<char> hit(cells);
  for (int n = 0; n <= n_max; ++n) {
    for (std::size_t level = 0; level < ladder.levels(); ++level) {
      const RegionCover& set = ladder.at(level, n);
      if (set.witnesses.size() < cells) continue;
      std::fill(hit.begin(), hit.end(), 0);
      std::size_t count = 0;
      for (const auto& w : set.witnesses) {
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(m - 1), static_cast<std::size_t>(w.point.frac[0] * m));
        const auto j = std::min<std::size_t>(static_cast<std::size_t>(m - 1), static_cast<std::size_t>(w.point.frac[1] * m));
        char& h = hit[i * static_cast<std::size_t>(m) + j];
        if (!h) {
          h = 1;
          ++count;
        }
      }
      if (count == cells) return CoveringReport{n, m, ladder.density(level), set.witnesses.size()};
    }
  }
  return std::nullopt;
}

}  // namespace torusendo
