#include "torusendo/report.hpp"

#include "torusendo/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace torusendo {

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["command"] = r.command;
  j["spec_digest"] = r.spec_digest;
  j["verdict"] = r.verdict;
  j["margin"] = r.margin ? nlohmann::json(*r.margin) : nlohmann::json(nullptr);
  j["witnesses"] = r.witnesses;
  j["details"] = r.details;
  j["seed"] = r.seed;
  j["version"] = kVersion;
  j["schema"] = kReportSchema;
  j["exit_code"] = r.exit_code;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

namespace {

void flatten(std::ostringstream& out, const std::string& prefix, const nlohmann::json& j) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(out, prefix.empty() ? k : prefix + "." + k, v);
  } else {
    out << prefix << ": " << j.dump() << '\n';
  }
}

}  // namespace

std::string to_text(const RunReport& r) {
  std::ostringstream out;
  out << "command: " << r.command << '\n';
  if (!r.spec_digest.empty()) out << "spec_digest: " << r.spec_digest << '\n';
  out << "verdict: " << r.verdict << '\n';
  if (r.margin) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *r.margin);
    out << "margin: " << buf << '\n';
  }
  flatten(out, "", r.details);
  constexpr std::size_t kShown = 4;
  for (std::size_t i = 0; i < std::min(kShown, r.witnesses.size()); ++i) {
    out << "witness[" << i << "]: " << r.witnesses[i].dump() << '\n';
  }
  if (r.witnesses.size() > kShown) out << "witnesses: " << r.witnesses.size() << " (all in report.json)\n";
  out << "seed: " << r.seed << '\n';
  return out.str();
}

void write_report(const std::filesystem::path& dir, const RunReport& r) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    f << text;
  };
  put("report.txt", to_text(r));
  put("report.json", to_json(r).dump(2) + "\n");
  for (const auto& a : r.artifacts) put(a.filename, a.contents);
}

SvgCanvas::SvgCanvas(Vec2 lower, Vec2 upper, int pixels) : lower_(lower), upper_(upper), pixels_(pixels) {
  for (int i = 0; i < 2; ++i) {
    if (!(upper_[i] > lower_[i])) upper_[i] = lower_[i] + 1.0;
  }
}

Vec2 SvgCanvas::map(const Vec2& p) const {
  const double sx = (p[0] - lower_[0]) / (upper_[0] - lower_[0]);
  const double sy = (p[1] - lower_[1]) / (upper_[1] - lower_[1]);
  return {sx * pixels_, (1.0 - sy) * pixels_};
}

void SvgCanvas::add_points(const std::vector<Vec2>& points, const std::string& color, double radius) {
  char buf[128];
  for (const auto& p : points) {
    const Vec2 q = map(p);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.2f\" fill=\"%s\"/>", q[0], q[1], radius,
                  color.c_str());
    elements_.emplace_back(buf);
  }
}

void SvgCanvas::add_polyline(const std::vector<Vec2>& points, const std::string& color, double width) {
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" points=\"";
  char buf[64];
  for (const auto& p : points) {
    const Vec2 q = map(p);
    std::snprintf(buf, sizeof buf, "%.3f,%.3f ", q[0], q[1]);
    s << buf;
  }
  s << "\"/>";
  elements_.push_back(s.str());
}

std::string SvgCanvas::render(const std::string& title) const {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels_ << "\" height=\"" << pixels_
    << "\" viewBox=\"0 0 " << pixels_ << ' ' << pixels_ << "\">\n";
  s << "<title>" << title << "</title>\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& e : elements_) s << e << '\n';
  s << "</svg>\n";
  return s.str();
}

}  // namespace torusendo
