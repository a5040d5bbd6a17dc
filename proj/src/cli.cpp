#include "torusendo/cli.hpp"

#include "torusendo/directions.hpp"
#include "torusendo/errors.hpp"
#include "torusendo/gallery.hpp"
#include "torusendo/integer_linear.hpp"
#include "torusendo/map_spec.hpp"
#include "torusendo/ph_certifier.hpp"
#include "torusendo/semiconjugacy.hpp"
#include "torusendo/transitivity_lab.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

#ifndef TORUSENDO_GALLERY_DIR
#define TORUSENDO_GALLERY_DIR "gallery"
#endif

namespace torusendo {

TorusEndomorphism resolve_map(const std::string& arg, std::optional<double> eps) {
  ParamOverrides overrides;
  if (eps) overrides["eps"] = *eps;
  namespace fs = std::filesystem;
  if (fs::is_regular_file(arg)) return parse_spec(arg, overrides);
  const fs::path in_gallery = fs::path(TORUSENDO_GALLERY_DIR) / arg;
  if (fs::is_regular_file(in_gallery)) return parse_spec(in_gallery, overrides);
  return gallery(arg, eps);
}

namespace {

constexpr const char* kCsvHelp =
    "CSV files written with --out:\n"
    "  fibers.csv      p_x,p_y,diameter,dir_x,dir_y\n"
    "  witnesses.csv   n,x,y,lift_i,lift_j\n"
    "  directions.csv  x,y,dir_x,dir_y,width\n"
    "Exit codes: 0 Certified/Found, 2 Failed/NotFound, 3 Inconclusive, 1 error.\n"
    "dichotomy exits 0 for either outcome. TORUSENDO_THREADS caps worker threads.";

nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v[0], v[1]}); }

nlohmann::json mat_json(const IntMat2& m) {
  return nlohmann::json::array({nlohmann::json::array({m(0, 0), m(0, 1)}), nlohmann::json::array({m(1, 0), m(1, 1)})});
}

nlohmann::json lift_json(const LiftPoint& p) {
  return {{"cell", nlohmann::json::array({to_string(p.cell[0]), to_string(p.cell[1])})}, {"frac", vec_json(p.frac)}};
}

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::Certified:
      return 0;
    case Verdict::Failed:
      return 2;
    case Verdict::Inconclusive:
      return 3;
  }
  return 1;
}

Vec2 to_vec(const std::vector<double>& v) { return {v.at(0), v.at(1)}; }

ConeSpec make_cone(double slope, const std::string& orientation) {
  ConeSpec c;
  c.slope = slope;
  c.orientation = orientation == "vertical" ? ConeOrientation::Vertical : ConeOrientation::Horizontal;
  return c;
}

void certificate_into(const Certificate& c, RunReport& r) {
  r.verdict = to_string(c.verdict);
  r.exit_code = verdict_code(c.verdict);
  r.margin = c.worst_margin;
  r.details["condition"] = c.condition;
  r.details["resolution"] = c.grid.resolution;
  r.details["iterate"] = c.grid.iterate;
  r.details["threshold"] = c.threshold;
  r.details["slack_used"] = c.slack_used;
  r.details["min_center_margin"] = c.min_center_margin;
  r.details["resolutions_tried"] = c.resolutions_tried;
  for (const auto& [k, v] : c.details) r.details[k] = v;
  if (c.witness) r.witnesses.push_back({{"point", vec_json(*c.witness)}});
}

struct Common {
  std::string map;
  std::optional<double> eps;
  std::string out_dir;
  bool json = false;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c, bool with_map) {
  if (with_map) sub->add_option("map", c.map, "map spec file or gallery name")->required();
  sub->add_option("--eps", c.eps, "value of the eps parameter");
  sub->add_option("--out", c.out_dir, "directory for report.txt, report.json, CSV and SVG");
  sub->add_flag("--json", c.json, "print the JSON report instead of text");
  sub->add_option("--seed", c.seed, "seed for sampled searches");
}

std::string csv_of(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certification and search tools for torus endomorphisms", "torusendo"};
  app.footer(kCsvHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;

  // certify-ph
  auto* ph = app.add_subcommand("certify-ph", "certify an invariant expanding cone field");
  add_common(ph, common, true);
  int ph_grid = 512, ph_iterate = 1, ph_max = 8192;
  double ph_slope = 1.0, ph_lambda = 2.0;
  std::string ph_orientation = "horizontal";
  ph->add_option("--grid", ph_grid, "initial grid resolution");
  ph->add_option("--max-grid", ph_max, "largest resolution tried");
  ph->add_option("--iterate", ph_iterate, "derivative iterate ell");
  ph->add_option("--slope", ph_slope, "cone slope");
  ph->add_option("--lambda", ph_lambda, "required expansion");
  ph->add_option("--orientation", ph_orientation, "horizontal or vertical")->check(CLI::IsMember({"horizontal", "vertical"}));

  // certify-sve
  auto* sve = app.add_subcommand("certify-sve", "certify |det Df^n| > |lambda1|^n everywhere");
  add_common(sve, common, true);
  int sve_grid = 512, sve_n = 1, sve_max = 8192;
  sve->add_option("--grid", sve_grid, "initial grid resolution");
  sve->add_option("--max-grid", sve_max, "largest resolution tried");
  sve->add_option("--n", sve_n, "iterate n");

  // canonical-form
  auto* canon = app.add_subcommand("canonical-form", "unimodular change of basis to lower triangular form");
  add_common(canon, common, false);
  std::vector<std::int64_t> canon_matrix;
  canon->add_option("--matrix", canon_matrix, "a,b,c,d (row major)")->delimiter(',')->expected(4)->required();

  // semiconj
  auto* semi = app.add_subcommand("semiconj", "semiconjugacy to the linear part: kappa and defect");
  add_common(semi, common, true);
  int semi_grid = 128;
  double semi_tol = 1e-8;
  semi->add_option("--grid", semi_grid, "grid resolution m");
  semi->add_option("--tol", semi_tol, "evaluation tolerance");

  // fibers
  auto* fib = app.add_subcommand("fibers", "estimate the fibre of the semiconjugacy through a point");
  add_common(fib, common, true);
  std::vector<double> fib_point{0.0, 0.0};
  FiberOptions fib_opts;
  double fib_delta = 0.005;
  fib->add_option("--point", fib_point, "x,y")->delimiter(',')->expected(2);
  fib->add_option("--depth", fib_opts.depth, "orbit depth N (0 picks one from delta)");
  fib->add_option("--samples", fib_opts.samples, "sample count");
  fib->add_option("--radius", fib_opts.radius, "closeness radius r");
  fib->add_option("--delta", fib_delta, "diameter above which the fibre counts as nontrivial");

  // dichotomy
  auto* dich = app.add_subcommand("dichotomy", "scan fibres on a grid: conjugacy evidence or annulus candidate");
  add_common(dich, common, true);
  int dich_grid = 8;
  double dich_delta = 0.005;
  FiberOptions dich_opts;
  dich->add_option("--grid", dich_grid, "grid resolution m");
  dich->add_option("--delta", dich_delta, "diameter threshold");
  dich->add_option("--depth", dich_opts.depth, "orbit depth N (0 picks one from delta)");
  dich->add_option("--samples", dich_opts.samples, "samples per fibre");

  // essential
  auto* ess = app.add_subcommand("essential", "doubly essential witness from a disc");
  add_common(ess, common, true);
  std::vector<double> ess_center{0.5, 0.5};
  double ess_radius = 0.05;
  int ess_level = 5, ess_nmax = 20, ess_density = 8;
  std::size_t ess_budget = 1u << 16;
  ess->add_option("--center", ess_center, "x,y")->delimiter(',')->expected(2);
  ess->add_option("--radius", ess_radius, "disc radius");
  ess->add_option("--level", ess_level, "dyadic level of the region cells");
  ess->add_option("--n-max", ess_nmax, "largest iterate");
  ess->add_option("--density", ess_density, "initial samples per cell edge");
  ess->add_option("--budget", ess_budget, "witness budget");

  // covering
  auto* cov = app.add_subcommand("covering", "iterate after which a region meets every grid cell");
  add_common(cov, common, true);
  std::string cov_region = "ball";
  std::vector<double> cov_center{0.5, 0.5};
  double cov_radius = 0.05, cov_half = 1.0 / 32.0;
  int cov_level = 5, cov_nmax = 25, cov_resolution = 32, cov_density = 8;
  std::size_t cov_budget = 1u << 16;
  cov->add_option("--region", cov_region, "ball or annulus")->check(CLI::IsMember({"ball", "annulus"}));
  cov->add_option("--center", cov_center, "ball centre x,y")->delimiter(',')->expected(2);
  cov->add_option("--radius", cov_radius, "ball radius");
  cov->add_option("--half-width", cov_half, "annulus {|y| <= w}");
  cov->add_option("--level", cov_level, "dyadic level of the region cells");
  cov->add_option("--n-max", cov_nmax, "largest iterate");
  cov->add_option("--resolution", cov_resolution, "torus grid m");
  cov->add_option("--density", cov_density, "initial samples per cell edge");
  cov->add_option("--budget", cov_budget, "witness budget");

  // directions
  auto* dir = app.add_subcommand("directions", "unstable and centre directions, special test");
  add_common(dir, common, true);
  std::vector<double> dir_point{0.0, 0.0};
  int dir_depth = 30, dir_trials = 16, dir_field = 8;
  double dir_slope = 1.0;
  std::string dir_orientation = "horizontal";
  dir->add_option("--point", dir_point, "x,y")->delimiter(',')->expected(2);
  dir->add_option("--depth", dir_depth, "depth");
  dir->add_option("--trials", dir_trials, "random pre-orbits");
  dir->add_option("--field", dir_field, "grid size of the exported direction field");
  dir->add_option("--slope", dir_slope, "cone slope");
  dir->add_option("--orientation", dir_orientation, "horizontal or vertical")->check(CLI::IsMember({"horizontal", "vertical"}));

  // gallery
  auto* gal = app.add_subcommand("gallery", "list gallery maps or print one as a map spec");
  add_common(gal, common, false);
  std::string gal_name;
  std::vector<std::int64_t> gal_matrix;
  gal->add_option("name", gal_name, "gallery name");
  gal->add_option("--matrix", gal_matrix, "a,b,c,d for linear")->delimiter(',')->expected(4);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.seed = common.seed;
  try {
    CLI::App* sub = app.get_subcommands().front();
    r.command = sub->get_name();
    std::optional<TorusEndomorphism> f;
    if (sub != canon && sub != gal) {
      f = resolve_map(common.map, common.eps);
      r.spec_digest = fnv1a64_hex(serialize_spec(*f));
      r.details["map"] = f->name();
    }

    if (sub == ph) {
      GridSpec g{ph_grid, ph_iterate, ph_lambda, ph_max};
      const ConeSpec cone = make_cone(ph_slope, ph_orientation);
      r.details["slope"] = ph_slope;
      r.details["orientation"] = ph_orientation;
      certificate_into(certify_cone_invariance(*f, cone, g), r);
    } else if (sub == sve) {
      GridSpec g{sve_grid, sve_n, 2.0, sve_max};
      certificate_into(certify_strong_volume_expansion(*f, g, sve_n), r);
      r.details["min_jacobian_lower_bound"] = r.details["threshold"].get<double>() + *r.margin;
    } else if (sub == canon) {
      IntMat2 a;
      a << canon_matrix[0], canon_matrix[1], canon_matrix[2], canon_matrix[3];
      const CanonicalForm cf = canonical_form(a);
      r.verdict = "Found";
      r.exit_code = 0;
      r.details["matrix"] = mat_json(a);
      r.details["change_of_basis"] = mat_json(cf.change_of_basis);
      r.details["triangular"] = mat_json(cf.triangular);
      r.details["lambda1"] = cf.eigen.lambda1;
      r.details["lambda2"] = cf.eigen.lambda2;
      r.details["eigenvector"] = nlohmann::json::array({cf.eigen.eigenvector[0], cf.eigen.eigenvector[1]});
    } else if (sub == semi) {
      const SemiconjParams params = kappa_bound(*f);
      const double defect = semiconj_defect(*f, semi_grid, semi_tol);
      double sup = 0.0;
      for (int i = 0; i < semi_grid; ++i) {
        for (int j = 0; j < semi_grid; ++j) {
          const Vec2 p(static_cast<double>(i) / semi_grid, static_cast<double>(j) / semi_grid);
          sup = std::max(sup, (semiconj_eval(*f, params, p, semi_tol) - p).lpNorm<Eigen::Infinity>());
        }
      }
      const double allowed = (f->linear_part_real().cwiseAbs().rowwise().sum().maxCoeff() + 2.0) * semi_tol;
      const bool ok = sup <= params.kappa + semi_tol && defect <= allowed;
      r.verdict = ok ? "Certified" : "Failed";
      r.exit_code = ok ? 0 : 2;
      r.margin = std::min(params.kappa + semi_tol - sup, allowed - defect);
      r.details["kappa0"] = params.kappa0;
      r.details["kappa"] = params.kappa;
      r.details["defect"] = defect;
      r.details["defect_allowed"] = allowed;
      r.details["sup_h_minus_id"] = sup;
      r.details["truncation"] = params.truncation_for(semi_tol);
      r.details["grid"] = semi_grid;
      r.details["tol"] = semi_tol;
    } else if (sub == fib) {
      fib_opts.seed = common.seed;
      const FiberEstimate e = estimate_fiber(*f, to_vec(fib_point), fib_opts);
      const bool found = e.diameter > fib_delta;
      r.verdict = found ? "Found" : "NotFound";
      r.exit_code = found ? 0 : 2;
      r.margin = e.diameter - fib_delta;
      r.details["diameter"] = e.diameter;
      r.details["direction"] = vec_json(e.direction);
      r.details["radius"] = e.radius;
      r.details["depth"] = e.depth;
      r.details["witness_count"] = e.witnesses.size();
      r.details["delta"] = fib_delta;
      for (const auto& w : e.witnesses) r.witnesses.push_back({{"point", vec_json(w)}});
      r.artifacts.push_back({"fibers.csv", csv_of([&](std::ostream& s) { write_fiber_csv(s, {e}); })});
      const Vec2 span(e.radius, e.radius);
      SvgCanvas svg(e.base - span, e.base + span);
      svg.add_points(e.witnesses, "black");
      svg.add_points({e.base}, "red", 3.0);
      r.artifacts.push_back({"fibers.svg", svg.render("fibre witnesses")});
    } else if (sub == dich) {
      dich_opts.seed = common.seed;
      const DichotomyVerdict v = dichotomy_test(*f, dich_grid, dich_delta, dich_opts);
      r.verdict = to_string(v.kind);
      r.exit_code = 0;
      r.margin = v.largest.diameter - dich_delta;
      r.details["delta"] = dich_delta;
      r.details["depth"] = v.depth;
      r.details["grid"] = dich_grid;
      r.details["largest_diameter"] = v.largest.diameter;
      r.details["largest_base"] = vec_json(v.largest.base);
      r.details["largest_direction"] = vec_json(v.largest.direction);
      r.witnesses.push_back({{"base", vec_json(v.largest.base)}, {"diameter", v.largest.diameter}});
      r.artifacts.push_back({"fibers.csv", csv_of([&](std::ostream& s) { write_fiber_csv(s, v.fibers); })});
      SvgCanvas svg(Vec2(-0.25, -0.25), Vec2(1.25, 1.25));
      for (const auto& e : v.fibers) {
        if (e.diameter > 0.0) {
          svg.add_polyline({e.base - 0.5 * e.diameter * e.direction, e.base + 0.5 * e.diameter * e.direction}, "blue");
        }
        svg.add_points({e.base}, "black");
      }
      r.artifacts.push_back({"fibers.svg", svg.render("fibre segments")});
    } else if (sub == ess) {
      const RegionCover u = ball_region(to_vec(ess_center), ess_radius, ess_level);
      SearchOptions so;
      so.density = ess_density;
      so.witness_budget = ess_budget;
      const auto rep = doubly_essential_witness(*f, u, ess_nmax, so);
      r.verdict = rep ? "Found" : "NotFound";
      r.exit_code = rep ? 0 : 2;
      r.details["n_max"] = ess_nmax;
      r.details["region_cells"] = u.cells.size();
      r.details["region_area"] = u.area();
      if (rep) {
        r.details["iterate"] = rep->iterate;
        r.details["density"] = rep->density;
        r.details["route"] = rep->route;
        for (const EssentialPair* p : {&rep->horizontal, &rep->vertical}) {
          r.witnesses.push_back({{"axis", p->axis},
                                 {"multiple", p->multiple},
                                 {"first", lift_json(p->first)},
                                 {"second", lift_json(p->second)},
                                 {"first_source", vec_json(p->first_source)},
                                 {"second_source", vec_json(p->second_source)},
                                 {"displacement_residual", p->displacement_residual},
                                 {"chain_residual", p->chain_residual}});
        }
      }
      // Iterate bound from the proof constants, when the volume growth can be certified.
      try {
        const SemiconjParams params = kappa_bound(*f);
        const Certificate c = certify_strong_volume_expansion(*f, GridSpec{256, 1, 2.0, 1024}, 1);
        if (c.verdict == Verdict::Certified) {
          const double lambda = c.threshold + c.worst_margin;
          const double leb = std::acos(-1.0) * ess_radius * ess_radius;
          const EssentialBound b = essential_iterate_bound(params.kappa, leb, f->linear_part(), lambda);
          r.details["bound_iterate"] = b.iterate;
          r.details["bound_lambda"] = lambda;
          r.details["bound_kappa"] = params.kappa;
          r.details["bound_measure"] = leb;
        } else {
          r.details["bound_iterate"] = nullptr;
        }
      } catch (const Error& e) {
        r.details["bound_iterate"] = nullptr;
        r.details["bound_note"] = e.what();
      }
    } else if (sub == cov) {
      const RegionCover u = cov_region == "ball" ? ball_region(to_vec(cov_center), cov_radius, cov_level)
                                                 : box_region(Vec2(0.0, -cov_half), Vec2(1.0, cov_half), cov_level);
      SearchOptions so;
      so.density = cov_density;
      so.witness_budget = cov_budget;
      const auto rep = covering_witness(*f, u, cov_resolution, cov_nmax, so);
      r.verdict = rep ? "Found" : "NotFound";
      r.exit_code = rep ? 0 : 2;
      r.details["region"] = cov_region;
      r.details["resolution"] = cov_resolution;
      r.details["n_max"] = cov_nmax;
      if (rep) {
        r.details["iterate"] = rep->iterate;
        r.details["density"] = rep->density;
        r.details["witness_count"] = rep->witness_count;
        r.witnesses.push_back({{"iterate", rep->iterate}});
      }
      if (!common.out_dir.empty()) {
        const int n = rep ? rep->iterate : cov_nmax;
        const RegionCover image = iterate_region(*f, with_witnesses(u, cov_density), n);
        r.artifacts.push_back({"witnesses.csv", csv_of([&](std::ostream& s) { write_witness_csv(s, image); })});
        std::vector<Vec2> pts;
        for (const auto& w : image.witnesses) pts.push_back(w.point.frac);
        SvgCanvas svg(Vec2(0, 0), Vec2(1, 1));
        svg.add_points(pts, "black", 1.0);
        r.artifacts.push_back({"witnesses.svg", svg.render("witness images on the torus")});
      }
    } else if (sub == dir) {
      const ConeSpec cone = make_cone(dir_slope, dir_orientation);
      const Vec2 p = to_vec(dir_point);
      const DirectionProbe u = unstable_direction(*f, p, {}, dir_depth, cone);
      const SpecialPhReport sp = special_ph_test(*f, p, dir_depth, dir_trials, common.seed, cone);
      r.details["unstable_direction"] = vec_json(u.direction);
      r.details["unstable_width"] = u.width;
      r.details["special_max_angle"] = sp.max_angle;
      r.details["special_max_width"] = sp.max_width;
      r.details["special_bound"] = sp.bound;
      r.details["trials"] = dir_trials;
      try {
        const DirectionProbe c = center_direction(*f, p, dir_depth, cone);
        r.details["center_direction"] = vec_json(c.direction);
        r.details["center_verified_steps"] = c.verified_steps;
        r.verdict = "Found";
        r.exit_code = 0;
      } catch (const ExclusionFailed& e) {
        r.details["center_note"] = e.what();
        r.verdict = "NotFound";
        r.exit_code = 2;
      }
      r.margin = sp.bound;
      std::vector<DirectionProbe> field;
      for (int i = 0; i < dir_field; ++i) {
        for (int j = 0; j < dir_field; ++j) {
          field.push_back(unstable_direction(*f, Vec2((i + 0.5) / dir_field, (j + 0.5) / dir_field), {}, dir_depth, cone));
        }
      }
      r.artifacts.push_back({"directions.csv", csv_of([&](std::ostream& s) { write_direction_csv(s, field); })});
      SvgCanvas svg(Vec2(0, 0), Vec2(1, 1));
      const double half = 0.4 / std::max(1, dir_field);
      for (const auto& d : field) svg.add_polyline({d.base - half * d.direction, d.base + half * d.direction}, "black");
      r.artifacts.push_back({"directions.svg", svg.render("unstable directions")});
    } else if (sub == gal) {
      r.verdict = "Found";
      r.exit_code = 0;
      if (gal_name.empty()) {
        r.details["names"] = gallery_names();
      } else {
        std::optional<IntMat2> m;
        if (!gal_matrix.empty()) {
          IntMat2 a;
          a << gal_matrix[0], gal_matrix[1], gal_matrix[2], gal_matrix[3];
          m = a;
        }
        const TorusEndomorphism g = gallery(gal_name, common.eps, m);
        const std::string text = serialize_spec(g);
        r.spec_digest = fnv1a64_hex(text);
        r.details["spec"] = text;
        r.artifacts.push_back({g.name() + ".map", text});
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (common.json) {
    out << to_json(r).dump(2) << '\n';
  } else {
    out << to_text(r);
  }
  if (!common.out_dir.empty()) {
    try {
      write_report(common.out_dir, r);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return r.exit_code;
}

}  // namespace torusendo
