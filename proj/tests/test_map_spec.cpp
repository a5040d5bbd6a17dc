#include "torusendo/errors.hpp"
#include "torusendo/gallery.hpp"
#include "torusendo/map_spec.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace torusendo;

namespace {

const std::filesystem::path kGallery = TORUSENDO_GALLERY_DIR;

ParseError parse_error_of(const std::string& text) {
  try {
    parse_spec_text(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError("", 0, 0);
}

}  // namespace

TEST_CASE("expressions") {
  const std::map<std::string, double> vars{{"eps", 0.25}, {"a", 3.0}};
  CHECK(evaluate_expression("1/3", {}) == 1.0 / 3);
  CHECK(evaluate_expression("2 + 3 * 4", {}) == 14);
  CHECK(evaluate_expression("(2 + 3) * 4", {}) == 20);
  CHECK(evaluate_expression("-(1+eps)/(4*pi)", vars) == -(1 + 0.25) / (4 * M_PI));
  CHECK(evaluate_expression("--2", {}) == 2);
  CHECK(evaluate_expression("π", {}) == M_PI);
  CHECK(evaluate_expression("ε * a", vars) == 0.75);
  CHECK(evaluate_expression("sqrt(a*a + 16)", vars) == 5);
  CHECK(evaluate_expression("1e-3 * 2", {}) == 0.002);
  CHECK_THROWS_AS(evaluate_expression("1 +", {}), ParseError);
  CHECK_THROWS_AS(evaluate_expression("(1", {}), ParseError);
  CHECK_THROWS_AS(evaluate_expression("1 / 0", {}), ParseError);
  CHECK_THROWS_AS(evaluate_expression("b", {}), ParseError);
  try {
    evaluate_expression("1 + * 2", {});
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.column() == 5);
  }
}

TEST_CASE("gallery files are the built-in maps") {
  CHECK(parse_spec(kGallery / "paper_example.map") == paper_example(0.1));
  CHECK(parse_spec(kGallery / "product_example.map") == product_example());
  CHECK(parse_spec(kGallery / "linear.map") == linear_map(IntMat2{{5, 0}, {0, 2}}));
  CHECK(parse_spec(kGallery / "paper_example.map", {{"eps", 0.05}}) == paper_example(0.05));
}

TEST_CASE("serialisation round trip") {
  for (const auto& f : {paper_example(0.1), product_example(), linear_map(IntMat2{{2, 1}, {-1, 3}})}) {
    CHECK(parse_spec_text(serialize_spec(f)) == f);
    CHECK(serialize_spec(parse_spec_text(serialize_spec(f))) == serialize_spec(f));
  }
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(-0.3, 0.3);
  std::uniform_int_distribution<int> wave(-3, 3), kind(0, 1), comp(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::array<std::vector<FourierTerm>, 2> terms;
    for (int s = 0; s < 5; ++s) {
      FourierTerm term{coef(rng), kind(rng) ? TrigKind::Sin : TrigKind::Cos, {wave(rng), wave(rng)}};
      if (term.kind == TrigKind::Sin && term.wavevector == std::array<int, 2>{0, 0}) term.wavevector[0] = 1;
      terms[static_cast<std::size_t>(comp(rng))].push_back(term);
    }
    const TorusEndomorphism f(IntMat2{{4, 1}, {2, 3}}, PeriodicField(terms[0], terms[1]), "random");
    CHECK(parse_spec_text(serialize_spec(f)) == f);
  }
}

TEST_CASE("parse errors carry line and column") {
  auto e = parse_error_of("name = x\nmatrix = 5 0 ; 0 2\ncolour = red\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == 1);
  e = parse_error_of("matrix = 5 0 ; 0\n");
  CHECK(e.line() == 1);
  e = parse_error_of("matrix = 5 0 ; 0 2\nterm 1 sin 0 1 1/(2*pi\n");
  CHECK(e.line() == 2);
  CHECK(e.column() > 15);
  e = parse_error_of("matrix = 5 0 ; 0 2\nterm 2 sin 0 1 1\n");
  CHECK(e.line() == 2);
  e = parse_error_of("matrix = 5 0 ; 0 2\nterm 0 tan 0 1 1\n");
  CHECK(e.line() == 2);
  e = parse_error_of("matrix = 5 0 ; 0 2\nmatrix = 5 0 ; 0 2\n");
  CHECK(e.line() == 2);
  CHECK_THROWS_AS(parse_spec_text("name = nothing\n"), ParseError);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(parse_spec_text("matrix = 5 0 ; 0 2\nterm 0 sin 0 0 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_spec_text("matrix = 1 2 ; 2 4\n"), ValidationError);
  CHECK_THROWS_AS(parse_spec_text("param eps = 0.1\nmatrix = 5 0 ; 0 2\n", {{"delta", 1.0}}), ValidationError);
  CHECK_THROWS_AS(parse_spec(kGallery / "no_such_file.map"), Error);
}

TEST_CASE("comments and blank lines") {
  const auto f = parse_spec_text("# a map\n\nname = demo   # trailing\nmatrix = 2 1 ; 1 3\n\n");
  CHECK(f.name() == "demo");
  CHECK(f.linear_part() == IntMat2{{2, 1}, {1, 3}});
  CHECK(f.displacement().empty());
}

TEST_CASE("gallery lookup") {
  CHECK(gallery_names() == std::vector<std::string>{"paper_example", "product_example", "linear"});
  CHECK(gallery("paper_example", 0.2) == paper_example(0.2));
  CHECK(gallery("linear", std::nullopt, IntMat2{{3, 0}, {0, 2}}) == linear_map(IntMat2{{3, 0}, {0, 2}}));
  CHECK_THROWS_AS(gallery("henon"), UnknownName);
}

TEST_CASE("product example stays inside the trapping bounds") {
  const auto b = fiber_map_bounds(product_example());
  CHECK(b.value_at_zero == 0.0);
  CHECK(b.derivative_at_zero == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(b.min_derivative > 2.0 / 3);
  CHECK(b.max_derivative < 3.0);
  CHECK(b.min_derivative <= 0.8);
  CHECK(b.max_derivative >= 2.8 - 1e-3);
  CHECK_THROWS_AS(fiber_map_bounds(paper_example(0.1)), ValidationError);
}
