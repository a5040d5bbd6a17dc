#pragma once

#include <stdexcept>
#include <string>

namespace torusendo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ResidualTooLarge : public Error {
 public:
  ResidualTooLarge(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class BranchDivergence : public Error {
 public:
  using Error::Error;
};

class NoIntegerEigenvalues : public Error {
 public:
  using Error::Error;
};

class AreaTooSmall : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class NotExpanding : public Error {
 public:
  using Error::Error;
};

class EigenvalueTieError : public Error {
 public:
  using Error::Error;
};

class CellBlowup : public Error {
 public:
  using Error::Error;
};

class ExclusionFailed : public Error {
 public:
  using Error::Error;
};

class NoFiniteN : public Error {
 public:
  using Error::Error;
};

class UnknownName : public Error {
 public:
  using Error::Error;
};

/// Syntax error in a map spec file; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace torusendo
