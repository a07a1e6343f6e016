#pragma once

#include <stdexcept>
#include <string>

namespace evcam {

/// Input tensor, image, or field violates an operation's shape/value contract.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration value is out of its allowed range (alpha <= 0, T = 0, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dataset directory does not follow the requested layout.
class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, decoded, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed binary container (bad magic, truncated payload, ...).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evcam
