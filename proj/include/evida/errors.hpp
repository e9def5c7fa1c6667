#pragma once

#include <stdexcept>
#include <string>

namespace evida {

// Error taxonomy mirrored by CLI exit codes: input 2, domain 3, transport 4.
enum class ErrorKind { input, domain, transport };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::input: return 2;
      case ErrorKind::domain: return 3;
      case ErrorKind::transport: return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

// Unreadable files, malformed external data, bad CLI arguments.
class InputError : public Error {
 public:
  explicit InputError(const std::string& message) : Error(ErrorKind::input, message) {}
};

// Violated mathematical preconditions and unknown domain entities.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error(ErrorKind::domain, message) {}
};

// Network failures that persist after retries.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message) : Error(ErrorKind::transport, message) {}
};

// Distinct failure codes for loading a persisted evidence bank.
enum class BankErrorCode { version_mismatch, checksum_mismatch, malformed };

class BankError : public InputError {
 public:
  BankError(BankErrorCode code, const std::string& message)
      : InputError(message), code_(code) {}

  BankErrorCode code() const noexcept { return code_; }

 private:
  BankErrorCode code_;
};

}  // namespace evida
