#pragma once

#include <stdexcept>
#include <string>

namespace routeseq {

// Base for everything the library throws. `kind()` is the stable,
// machine-readable tag surfaced by the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error("invalid_input", what) {}
};

struct MalformedRoute : Error {
  explicit MalformedRoute(const std::string& what) : Error("malformed_route", what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error("numeric_error", what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

// Schema violation while reading a dataset or checkpoint; `path` is a JSON
// pointer to the offending element.
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& what)
      : Error("parse_error", path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace routeseq
