#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace attractor {

/// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

/// Raised when a point is passed to a mapping outside of its domain.
/// Carries the offending coordinates.
class DomainViolation : public Error {
 public:
  DomainViolation(std::string mapping, std::vector<double> point)
      : Error("point outside the domain of mapping '" + mapping + "'"),
        mapping_(std::move(mapping)),
        point_(std::move(point)) {}

  const std::string& mapping() const noexcept { return mapping_; }
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::string mapping_;
  std::vector<double> point_;
};

class SamplingFailure : public Error {
 public:
  using Error::Error;
};

class UnknownMapping : public Error {
 public:
  explicit UnknownMapping(const std::string& name, const std::string& why = "unknown mapping")
      : Error(why + ": '" + name + "'"), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class EmptyReferenceSet : public Error {
 public:
  EmptyReferenceSet() : Error("reference point set is empty") {}
};

class NoGenerators : public Error {
 public:
  NoGenerators() : Error("generator list is empty") {}
};

class DegenerateConstraint : public Error {
 public:
  DegenerateConstraint() : Error("half-space normal is the zero vector") {}
};

class ProjectionNotConverged : public Error {
 public:
  ProjectionNotConverged(std::size_t cycles, double displacement)
      : Error("Dykstra projection did not converge after " + std::to_string(cycles) +
              " cycles (last displacement " + std::to_string(displacement) + ")"),
        cycles_(cycles),
        displacement_(displacement) {}

  std::size_t cycles() const noexcept { return cycles_; }
  double displacement() const noexcept { return displacement_; }

 private:
  std::size_t cycles_;
  double displacement_;
};

class AttractorEmpty : public Error {
 public:
  explicit AttractorEmpty(double residual)
      : Error("attractor approximation appears empty (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct IterationTrace;

/// Raised when an iterate overflows or becomes NaN. The partial trace up to
/// (and excluding) the offending step is kept for inspection.
class NumericalDivergence : public Error {
 public:
  NumericalDivergence(std::size_t step, std::shared_ptr<const IterationTrace> partial)
      : Error("non-finite iterate at step " + std::to_string(step)),
        step_(step),
        partial_(std::move(partial)) {}

  std::size_t step() const noexcept { return step_; }
  const std::shared_ptr<const IterationTrace>& partial_trace() const noexcept { return partial_; }

 private:
  std::size_t step_;
  std::shared_ptr<const IterationTrace> partial_;
};

class ConfigSyntaxError : public Error {
 public:
  ConfigSyntaxError(const std::string& what, std::size_t line, std::size_t column)
      : Error("config syntax error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ConfigSemanticError : public Error {
 public:
  ConfigSemanticError(std::string field, const std::string& why)
      : Error("config error in '" + field + "': " + why), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace attractor
