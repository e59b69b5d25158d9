#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vti {

// Base for every error raised by the library. The CLI maps the concrete
// type to an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range radius, spacing, step count, block extent, ...
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch, non-monotone coordinates, taper wider than the domain.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Nonphysical earth model values (e.g. nonpositive vz^2).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Thomsen-parameter condition violated while strict checking is enabled.
class AnisotropyError : public ModelError {
 public:
  using ModelError::ModelError;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public Error {
 public:
  InstabilityError(long step, const std::string& what)
      : Error("non-finite wavefield at step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Run-config validation failure; `field` is the dotted key path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace vti
