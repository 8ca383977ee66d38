#pragma once

#include <stdexcept>
#include <string>

namespace tapom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric input does not determine a result (collinear plane fit,
/// zero-area hull, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Document is not valid JSON.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Document is JSON but violates the scene schema. `path()` names the
/// offending field.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Start or goal configuration is invalid at load time. `which()` is
/// "start" or "goal".
class InvalidEndpoint : public Error {
 public:
  InvalidEndpoint(const std::string& which, const std::string& what)
      : Error(which + ": " + what), which_(which) {}
  const std::string& which() const { return which_; }

 private:
  std::string which_;
};

/// Two sub-obstacles overlap over an extended region with no declared
/// contact point; the scene needs a manual contact annotation.
class AmbiguousContact : public Error {
 public:
  using Error::Error;
};

/// No channel-graph edge incident to the start or goal node survived the
/// edge-weight threshold.
class DisconnectedEndpoints : public Error {
 public:
  using Error::Error;
};

/// Path selection was asked to choose from an empty candidate set.
class NoFeasiblePath : public Error {
 public:
  using Error::Error;
};

}  // namespace tapom
