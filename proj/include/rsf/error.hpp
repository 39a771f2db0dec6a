#pragma once

#include <stdexcept>
#include <string>

namespace rsf {

/// Shape or channel-count mismatch, out-of-range argument.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration values that violate their documented ranges (even window, bad ratio, ...).
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed image bytes. The message carries the byte offset reached by the decoder.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Manifest / config file problems. Messages carry the line number when known.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN or infinity reached a loss, gradient or parameter.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rsf
