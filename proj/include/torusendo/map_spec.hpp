#pragma once

#include "torusendo/map_model.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace torusendo {

/// Values replacing the declared `param` defaults, by name.
using ParamOverrides = std::map<std::string, double>;

/// Arithmetic over numbers, + - * /, parentheses, pi (or the Greek letter), sqrt(...) and the
/// given variables. `eps` may also be written with the Greek letter. Throws ParseError with a
/// 1-based column; the line is 0 when the text is not part of a file.
double evaluate_expression(const std::string& text, const std::map<std::string, double>& variables,
                           int line = 0, int column_offset = 0);

/// Map spec text:
///   # comment
///   name = paper_example
///   param eps = 0.1
///   matrix = 5 0 ; 0 2
///   term <0|1> <sin|cos> <k1> <k2> <expr>
/// Throws ParseError (unknown keys, malformed lines) and ValidationError (sin with zero
/// wavevector, singular matrix, an override naming no declared parameter).
TorusEndomorphism parse_spec_text(const std::string& text, const ParamOverrides& overrides = {});
TorusEndomorphism parse_spec(const std::filesystem::path& path, const ParamOverrides& overrides = {});

/// Canonical text: name, matrix, then terms with coefficients printed to 17 significant digits,
/// so parse_spec_text(serialize_spec(f)) == f.
std::string serialize_spec(const TorusEndomorphism& f);

}  // namespace torusendo
