#pragma once

#include "torusendo/map_model.hpp"
#include "torusendo/report.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace torusendo {

/// A path to a map spec, a file in the gallery directory, or a gallery name, tried in that order.
/// eps overrides the `eps` parameter. Throws UnknownName.
TorusEndomorphism resolve_map(const std::string& arg, std::optional<double> eps = std::nullopt);

/// Runs one subcommand (args exclude the program name). Prints the text report, or the JSON
/// report with --json, and writes files with --out. Returns the exit code: 0 Certified/Found,
/// 2 Failed/NotFound, 3 Inconclusive, 1 error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace torusendo
