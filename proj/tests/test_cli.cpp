#include "torusendo/cli.hpp"
#include "torusendo/errors.hpp"
#include "torusendo/gallery.hpp"
#include "torusendo/map_spec.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace torusendo;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json invoke_json(std::vector<std::string> args) {
  args.push_back("--json");
  auto r = invoke(args);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["exit_code"] == r.code);
  j.erase("wall_time_s");
  return j;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("torusendo_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("known digests") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("map resolution") {
  CHECK(resolve_map("paper_example") == paper_example(0.1));
  CHECK(resolve_map("paper_example", 0.2) == paper_example(0.2));
  CHECK(resolve_map("product_example.map") == product_example());
  CHECK(resolve_map(std::string(TORUSENDO_GALLERY_DIR) + "/linear.map") == linear_map(IntMat2{{5, 0}, {0, 2}}));
  CHECK_THROWS_AS(resolve_map("no_such_map"), UnknownName);
}

TEST_CASE("exit codes") {
  CHECK(invoke({"certify-sve", "paper_example", "--grid", "256"}).code == 0);
  CHECK(invoke({"certify-sve", "product_example", "--grid", "64"}).code == 2);
  CHECK(invoke({"certify-sve", "paper_example", "--grid", "4", "--max-grid", "4"}).code == 3);
  CHECK(invoke({"certify-ph", "paper_example", "--lambda", "2.8284271247461903"}).code == 0);
  CHECK(invoke({"certify-ph", "paper_example", "--lambda", "4.5", "--grid", "64", "--max-grid", "64"}).code == 2);
  CHECK(invoke({"semiconj", "paper_example", "--grid", "16"}).code == 0);
  CHECK(invoke({"fibers", "product_example", "--point", "0.3,0"}).code == 0);
  CHECK(invoke({"fibers", "linear", "--point", "0.3,0.2"}).code == 2);
  CHECK(invoke({"dichotomy", "linear", "--grid", "2"}).code == 0);
  CHECK(invoke({"dichotomy", "product_example", "--grid", "2"}).code == 0);
  CHECK(invoke({"essential", "linear", "--center", "0.15,0.15", "--radius", "0.2"}).code == 0);
  CHECK(invoke({"covering", "product_example", "--region", "annulus", "--n-max", "8"}).code == 2);
  CHECK(invoke({"directions", "paper_example", "--depth", "20", "--trials", "4"}).code == 0);
  CHECK(invoke({"gallery"}).code == 0);
  CHECK(invoke({"gallery", "product_example"}).code == 0);
}

TEST_CASE("errors exit with 1") {
  const auto unknown = invoke({"certify-sve", "henon"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("error:") != std::string::npos);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"canonical-form", "--matrix", "1,-1,1,1"}).code == 1);
  CHECK(invoke({"canonical-form", "--matrix", "1,2,3"}).code == 1);
  CHECK(invoke({"certify-sve", "paper_example", "--eps", "1.5"}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("canonical form output") {
  const auto j = invoke_json({"canonical-form", "--matrix", "4,1,2,3"});
  CHECK(j["verdict"] == "Found");
  CHECK(j["details"]["triangular"] == nlohmann::json::parse("[[5,0],[2,2]]"));
}

TEST_CASE("json reports are deterministic") {
  const std::vector<std::vector<std::string>> commands{
      {"certify-sve", "paper_example", "--grid", "128"},
      {"semiconj", "paper_example", "--grid", "8"},
      {"fibers", "paper_example", "--point", "0,0"},
      {"covering", "linear", "--center", "0.15,0.15", "--radius", "0.2", "--resolution", "8"},
      {"directions", "paper_example", "--depth", "15", "--trials", "5", "--seed", "3"},
  };
  for (const auto& c : commands) {
    const auto a = invoke_json(c), b = invoke_json(c);
    CHECK(a.dump() == b.dump());
    CHECK(a["schema"] == kReportSchema);
    CHECK(a["version"] == kVersion);
  }
}

TEST_CASE("spec digest is the digest of the canonical spec") {
  const auto j = invoke_json({"certify-sve", "product_example", "--grid", "32"});
  CHECK(j["spec_digest"] == fnv1a64_hex(serialize_spec(product_example())));
}

TEST_CASE("output directories") {
  const auto dir = scratch("fibers");
  CHECK(invoke({"fibers", "product_example", "--point", "0.3,0", "--out", dir.string()}).code == 0);
  CHECK(std::filesystem::exists(dir / "report.txt"));
  CHECK(slurp(dir / "fibers.csv").rfind("p_x,p_y,diameter,dir_x,dir_y\n", 0) == 0);
  CHECK(slurp(dir / "fibers.svg").find("<svg") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j["verdict"] == "Found");
  CHECK(j["command"] == "fibers");

  const auto cov = scratch("covering");
  CHECK(invoke({"covering", "linear", "--center", "0.15,0.15", "--radius", "0.2", "--resolution", "8", "--out",
                cov.string()})
            .code == 0);
  CHECK(slurp(cov / "witnesses.csv").rfind("n,x,y,lift_i,lift_j\n", 0) == 0);

  const auto dirs = scratch("directions");
  CHECK(invoke({"directions", "product_example", "--depth", "15", "--trials", "3", "--out", dirs.string()}).code == 0);
  CHECK(slurp(dirs / "directions.csv").rfind("x,y,dir_x,dir_y,width\n", 0) == 0);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(cov);
  std::filesystem::remove_all(dirs);
}

TEST_CASE("gallery prints a parseable spec") {
  const auto j = invoke_json({"gallery", "paper_example", "--eps", "0.2"});
  CHECK(parse_spec_text(j["details"]["spec"].get<std::string>()) == paper_example(0.2));
}
