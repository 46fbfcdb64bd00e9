#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cpo {

// The kind decides the process exit code in the CLI (2, 3, 4).
enum class ErrorKind { validation, numeric, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Stable machine-readable identifier, e.g. "probe_not_perturbative".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  ValidationError(std::string code, const std::string& message);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

class NumericError : public Error {
 public:
  NumericError(std::string code, const std::string& message)
      : Error(ErrorKind::numeric, std::move(code), message) {}
};

class IoError : public Error {
 public:
  IoError(std::string code, const std::string& message)
      : Error(ErrorKind::io, std::move(code), message) {}
};

}  // namespace cpo
