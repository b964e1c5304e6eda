#pragma once

#include <stdexcept>
#include <string>

namespace facet {

/// Base class for all errors raised by the facet library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input that could not be read at all (bad CSV arity, bad JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a documented contract (duplicate ids,
/// values outside a declared scale, thresholds out of range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; carries the stage name for diagnostics.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace facet
