#pragma once

#include <stdexcept>
#include <string>

namespace focus {

/// Invalid configuration, flag combination, or parameter value (CLI exit 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input data (CLI exit 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant (CLI exit 4).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void internal_check(bool ok, const std::string& what) {
  if (!ok) throw InternalError(what);
}

}  // namespace focus
