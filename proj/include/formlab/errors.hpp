#pragma once

#include <stdexcept>
#include <string>

namespace formlab {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SyntaxError : Error {
  std::size_t offset;
  SyntaxError(const std::string& msg, std::size_t at)
      : Error(msg + " (at byte " + std::to_string(at) + ")"), offset(at) {}
};

struct UnknownToken : SyntaxError {
  UnknownToken(const std::string& msg, std::size_t at) : SyntaxError(msg, at) {}
};

struct UnboundSymbol : Error {
  explicit UnboundSymbol(const std::string& name)
      : Error("unbound symbol: " + name) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

struct OverflowError : Error {
  explicit OverflowError(const std::string& msg) : Error(msg) {}
};

struct ChartMismatch : Error {
  explicit ChartMismatch(const std::string& msg) : Error(msg) {}
};

struct DegreeError : Error {
  explicit DegreeError(const std::string& msg) : Error(msg) {}
};

struct UnsupportedDegree : Error {
  explicit UnsupportedDegree(const std::string& msg) : Error(msg) {}
};

struct NotClosed : Error {
  explicit NotClosed(const std::string& msg) : Error(msg) {}
};

struct UnsupportedCoefficient : Error {
  explicit UnsupportedCoefficient(const std::string& msg) : Error(msg) {}
};

struct NotFound : Error {
  explicit NotFound(const std::string& msg) : Error(msg) {}
};

struct MetricError : Error {
  explicit MetricError(const std::string& msg) : Error(msg) {}
};

struct ArityError : Error {
  explicit ArityError(const std::string& msg) : Error(msg) {}
};

struct ConstraintError : Error {
  explicit ConstraintError(const std::string& msg) : Error(msg) {}
};

struct NotClosedOnPseudostructure : Error {
  explicit NotClosedOnPseudostructure(const std::string& msg) : Error(msg) {}
};

struct UnmappedCombination : Error {
  explicit UnmappedCombination(const std::string& msg) : Error(msg) {}
};

struct GridError : Error {
  explicit GridError(const std::string& msg) : Error(msg) {}
};

struct NonFinite : Error {
  double s;
  NonFinite(const std::string& msg, double at) : Error(msg), s(at) {}
};

struct DegenerateError : Error {
  explicit DegenerateError(const std::string& msg) : Error(msg) {}
};

struct UndeclaredName : Error {
  explicit UndeclaredName(const std::string& name)
      : Error("undeclared name: " + name) {}
};

struct DegreeOutOfRange : Error {
  explicit DegreeOutOfRange(const std::string& msg) : Error(msg) {}
};

}  // namespace formlab
