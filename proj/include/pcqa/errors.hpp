#pragma once

#include <stdexcept>
#include <string>

namespace pcqa {

/// Malformed input file: PLY payload or manifest CSV. The message names
/// the file and the line (text) or byte offset (binary) of the problem.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message) : std::runtime_error(message) {}

  static ParseError at_line(const std::string& path, std::size_t line, const std::string& what) {
    return ParseError(path + ":" + std::to_string(line) + ": " + what);
  }
  static ParseError at_offset(const std::string& path, std::size_t offset, const std::string& what) {
    return ParseError(path + ": byte " + std::to_string(offset) + ": " + what);
  }
};

/// The operation needs a per-point attribute (colors) the cloud does not carry.
class MissingAttributeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Logistic regression cannot be performed on the given scores.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcqa
