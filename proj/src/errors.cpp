#include "torusendo/errors.hpp"

namespace torusendo {

ParseError::ParseError(const std::string& message, int line, int column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace torusendo
