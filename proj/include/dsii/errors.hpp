#pragma once

#include <stdexcept>
#include <string>

namespace dsii {

// Exit-code contract: 1 = validation failure, 2 = numerical-invariant
// violation, 3 = I/O failure.
class Error : public std::runtime_error {
 public:
  Error(std::string what, int exit_code)
      : std::runtime_error(std::move(what)), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what, 1) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, 2) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, 3) {}
};

struct ConstraintViolation : ValidationError {
  explicit ConstraintViolation(const std::string& w) : ValidationError("ConstraintViolation: " + w) {}
};
struct NoSaddle : ValidationError {
  explicit NoSaddle(const std::string& w) : ValidationError("NoSaddle: " + w) {}
};
struct ZeroMean : ValidationError {
  explicit ZeroMean(const std::string& w) : ValidationError("ZeroMean: " + w) {}
};
struct BranchUndefined : ValidationError {
  explicit BranchUndefined(const std::string& w) : ValidationError("BranchUndefined: " + w) {}
};
struct ConfigError : ValidationError {
  explicit ConfigError(const std::string& w) : ValidationError("ConfigError: " + w) {}
};

struct DegenerateDenominator : NumericalError {
  explicit DegenerateDenominator(const std::string& w) : NumericalError("DegenerateDenominator: " + w) {}
};
struct QuadratureNotConverged : NumericalError {
  explicit QuadratureNotConverged(const std::string& w) : NumericalError("QuadratureNotConverged: " + w) {}
};
struct SingularDenominator : NumericalError {
  explicit SingularDenominator(const std::string& w) : NumericalError("SingularDenominator: " + w) {}
};
struct SingularSystem : NumericalError {
  explicit SingularSystem(const std::string& w) : NumericalError("SingularSystem: " + w) {}
};
struct MissingEntry : NumericalError {
  explicit MissingEntry(const std::string& w) : NumericalError("MissingEntry: " + w) {}
};
struct NonlinearContamination : NumericalError {
  explicit NonlinearContamination(const std::string& w) : NumericalError("NonlinearContamination: " + w) {}
};

}  // namespace dsii
