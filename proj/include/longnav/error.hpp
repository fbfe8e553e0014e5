#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace longnav {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: width mismatches, values outside their domain.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Histogram voting had nothing to vote on.
class NoConsensus : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class TeachError : public Error {
 public:
  using Error::Error;
};

/// Non-fatal diagnostics go here. The default handler prints to std::clog;
/// the handler is process-wide and must be thread-safe.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace longnav
