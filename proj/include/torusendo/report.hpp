#pragma once

#include "torusendo/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace torusendo {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

/// Extra file written next to the report.
struct Artifact {
  std::string filename;
  std::string contents;
};

struct RunReport {
  std::string command;
  std::string spec_digest;  ///< FNV-1a 64 of the canonical map spec, hex; empty without a map
  std::string verdict;
  std::optional<double> margin;
  nlohmann::json witnesses = nlohmann::json::array();
  nlohmann::json details = nlohmann::json::object();
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  int exit_code = 0;
  std::vector<Artifact> artifacts;
};

std::string fnv1a64_hex(std::string_view data);

/// Keys are sorted; with wall_time_s removed the output depends only on the inputs.
nlohmann::json to_json(const RunReport& report);
std::string to_text(const RunReport& report);

/// report.txt, report.json and the artifacts. Creates the directory.
void write_report(const std::filesystem::path& dir, const RunReport& report);

/// Minimal SVG: points and polylines in a fixed view box.
class SvgCanvas {
 public:
  SvgCanvas(Vec2 lower, Vec2 upper, int pixels = 512);
  void add_points(const std::vector<Vec2>& points, const std::string& color, double radius = 1.5);
  void add_polyline(const std::vector<Vec2>& points, const std::string& color, double width = 1.0);
  std::string render(const std::string& title) const;

 private:
  Vec2 map(const Vec2& p) const;
  Vec2 lower_, upper_;
  int pixels_;
  std::vector<std::string> elements_;
};

}  // namespace torusendo
