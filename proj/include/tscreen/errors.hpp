#pragma once

#include <stdexcept>
#include <string>

namespace tscreen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input header or schema file does not match the declared schema.
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (schema, synthetic config, centroid table, screening config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A record cannot be placed into the cube calendar.
class BuildError : public Error {
 public:
  using Error::Error;
};

/// Malformed conjunction or window.
class QueryError : public Error {
 public:
  using Error::Error;
};

/// A statistical routine was called on a table it cannot handle.
class StatError : public Error {
 public:
  using Error::Error;
};

/// Prospective screen requested at a frontier with no admissible window.
class EmptyScreen : public Error {
 public:
  using Error::Error;
};

}  // namespace tscreen
