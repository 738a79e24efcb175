#pragma once

#include <stdexcept>
#include <string>

namespace hdmf {

// Invalid user configuration (bad HierarchySpec, grid too small, edgeless
// graph with beta > 0, unknown config keys). Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed on-disk data: bad DMAT header, truncated payload, bad edge list.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data violating a structural invariant (shape mismatch, non-finite values).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hdmf
