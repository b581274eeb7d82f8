#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace itm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// A mutation would break group disjointness or otherwise clashes with current
/// state. `group()` names the group holding the contested word, when there is one.
class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& what, std::string group = {}) : Error(what), group_(std::move(group)) {}
  const std::string& group() const noexcept { return group_; }

 private:
  std::string group_;
};

}  // namespace itm
