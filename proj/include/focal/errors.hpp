#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace focal {

// Base for every error raised by this library. CLI and server map
// subclasses onto exit codes and HTTP statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or structural error while reading a narrative/label/script file.
// line and column are 1-based; 0 means "not tied to a text position".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0,
             std::string path = {});

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& path() const { return path_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string path_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

// Raised when an id (scene, event, character, story) does not resolve.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Geometry cannot be produced, e.g. a card wider than its container.
class LayoutError : public Error {
 public:
  LayoutError(const std::string& message, std::string scene_id = {});
  const std::string& scene_id() const { return scene_id_; }

 private:
  std::string scene_id_;
};

class RenderError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  AlignmentError(const std::string& message, std::vector<std::string> missing_in_pred,
                 std::vector<std::string> missing_in_gold);
  const std::vector<std::string>& missing_in_pred() const { return missing_in_pred_; }
  const std::vector<std::string>& missing_in_gold() const { return missing_in_gold_; }

 private:
  std::vector<std::string> missing_in_pred_;
  std::vector<std::string> missing_in_gold_;
};

class EmptyEvaluation : public Error {
 public:
  using Error::Error;
};

// Provider output that cannot be accepted. All three kinds are retried.
class ResponseError : public Error {
 public:
  using Error::Error;
};

class MalformedResponse : public ResponseError {
 public:
  using ResponseError::ResponseError;
};

class UnknownCharacter : public ResponseError {
 public:
  using ResponseError::ResponseError;
};

class RangeError : public ResponseError {
 public:
  using ResponseError::ResponseError;
};

// The provider could not be reached or answered with a non-success status.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace focal
