#pragma once

#include <stdexcept>
#include <string>

namespace emhd {

// Exit-code taxonomy used by the CLI: config errors -> 3, numerical
// breakdown -> 4, monitor failures -> 2 (reported, not thrown).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidFieldError : std::runtime_error {
  explicit InvalidFieldError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedOrderError : ConfigError {
  explicit UnsupportedOrderError(const std::string& what) : ConfigError(what) {}
};

// Bubble supports left the nested geometry (or touched the origin).
struct CascadeDegeneracyError : NumericalError {
  explicit CascadeDegeneracyError(const std::string& what) : NumericalError(what) {}
};

struct StiffnessError : NumericalError {
  explicit StiffnessError(const std::string& what) : NumericalError(what) {}
};

struct StepSizeError : NumericalError {
  explicit StepSizeError(const std::string& what) : NumericalError(what) {}
};

struct CoverageError : ConfigError {
  explicit CoverageError(const std::string& what) : ConfigError(what) {}
};

struct ResolutionError : ConfigError {
  explicit ResolutionError(const std::string& what) : ConfigError(what) {}
};

struct ExtrapolationError : NumericalError {
  explicit ExtrapolationError(const std::string& what) : NumericalError(what) {}
};

struct ProbeError : NumericalError {
  explicit ProbeError(const std::string& what) : NumericalError(what) {}
};

struct SchemaError : ConfigError {
  explicit SchemaError(const std::string& what) : ConfigError(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace emhd
