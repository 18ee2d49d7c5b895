#pragma once

#include <stdexcept>
#include <string>

namespace tempofeat {

/// Malformed input file; message carries file, line and column context.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& column,
             const std::string& detail)
      : std::runtime_error(file + ":" + std::to_string(line) + " column '" + column +
                           "': " + detail) {}
};

/// Structurally valid input that violates a dataset invariant (duplicate ids, dangling refs).
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad run configuration (unknown model name, invalid flag combination).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tempofeat
