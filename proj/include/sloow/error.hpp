#pragma once

#include <stdexcept>
#include <string>

namespace sloow {

// Base of every error the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid scenario or controller configuration. `field()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string detail)
      : ConfigError(field + ": " + detail, std::move(field), std::move(detail)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }

 protected:
  ConfigError(const std::string& message, std::string field, std::string detail)
      : Error(message), field_(std::move(field)), detail_(std::move(detail)) {}

 private:
  std::string field_;
  std::string detail_;
};

// Scenario text that fails to parse; carries the 1-based line number (0 when
// the problem is not tied to a line).
class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, std::string field, std::string detail)
      : ConfigError((line ? "line " + std::to_string(line) + ": " : std::string{}) +
                        (field.empty() ? std::string{} : field + ": ") + detail,
                    field, detail),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Out-of-range or malformed argument to a pure operation.
struct InputError : Error {
  using Error::Error;
};

// Rejected by the curtain device (mirrors the bridge's ERR RANGE).
struct DeviceError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Server could not bind/listen on its endpoint.
struct StartupError : Error {
  using Error::Error;
};

}  // namespace sloow
