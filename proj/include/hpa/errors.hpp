#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace hpa {

// Base of every error the library throws. Callers that only care about
// "something in the simulator went wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidFrame : public Error {
 public:
  InvalidFrame(std::string reason, std::string field)
      : Error("invalid frame: " + reason),
        reason_(std::move(reason)),
        field_(std::move(field)) {}

  const std::string& reason() const noexcept { return reason_; }
  // Name of the frame field that carries the violation.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string reason_;
  std::string field_;
};

class InvalidParams : public Error {
 public:
  explicit InvalidParams(const std::string& what)
      : Error("invalid parameters: " + what) {}
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& what)
      : Error("invalid session config: " + what) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonFiniteInput : public Error {
 public:
  explicit NonFiniteInput(const std::string& what)
      : Error("non-finite input: " + what) {}
};

class ProfileStateMismatch : public Error {
 public:
  using Error::Error;
};

class OutOfSession : public Error {
 public:
  using Error::Error;
};

class EmptyPhase : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ReplaySourceMissing : public Error {
 public:
  using Error::Error;
};

class IoFailure : public Error {
 public:
  using Error::Error;
};

// Malformed file content. line is 1-based; 0 when the violation is not
// tied to a particular line (e.g. writing an empty trace).
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::size_t line, std::string field, const std::string& detail = {})
      : Error(format(line, field, detail)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field,
                            const std::string& detail) {
    std::string msg = "schema violation";
    if (line > 0) msg += " at line " + std::to_string(line);
    msg += ": " + field;
    if (!detail.empty()) msg += " (" + detail + ")";
    return msg;
  }

  std::size_t line_;
  std::string field_;
};

class ClientProtocolError : public Error {
 public:
  explicit ClientProtocolError(const std::string& what)
      : Error("client protocol error: " + what) {}
};

class PortUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace hpa
