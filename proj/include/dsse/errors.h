#pragma once

#include <stdexcept>
#include <string>

namespace dsse {

// Exception hierarchy. The CLI maps each kind onto its exit code.

// Invalid parameter values or an unknown configuration key.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// API misuse: wrong frame length, mismatched gain log, bad arguments.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Signal content that makes a measurement undefined (e.g. all-silent speech).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// File could not be read, written, or decoded.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dsse
