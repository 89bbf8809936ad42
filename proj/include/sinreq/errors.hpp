#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sinreq {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or size mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range or otherwise invalid scalar argument.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Misuse of the autodiff graph API (e.g. backward from a non-scalar node).
class ContractError : public Error {
 public:
  using Error::Error;
};

// An operation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Quantizer normalisation divided by zero.
class DegenerateScaleError : public Error {
 public:
  using Error::Error;
};

// Model/experiment configuration is incomplete or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Model specification does not compose (layer shapes, duplicate names).
class SpecError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t step, const std::string& what)
      : Error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

// Malformed binary input. `field()` names the offending part of the format.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace sinreq
