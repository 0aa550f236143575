#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lumpcorr {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument violates the precondition of the operation it was passed to.
class DomainError : public Error {
public:
  using Error::Error;
};

class InvalidMesh : public Error {
public:
  using Error::Error;
};

class DegenerateElement : public Error {
public:
  using Error::Error;
};

/// Malformed mesh text. `line()` is 1-based.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class NonPositiveLumping : public Error {
public:
  using Error::Error;
};

/// The iterative mass solve did not reach its tolerance.
class SolveFailure : public Error {
public:
  using Error::Error;
};

/// A state entry became NaN or infinite during time integration.
class NonFinite : public Error {
public:
  using Error::Error;
};

/// Two gaps used for an empirical order have different signs.
class SignChange : public Error {
public:
  using Error::Error;
};

class AllNodesExcluded : public Error {
public:
  using Error::Error;
};

/// Two algebraically identical evaluations disagreed. Indicates a bug.
class InternalMismatch : public Error {
public:
  using Error::Error;
};

} // namespace lumpcorr
