#pragma once

#include <stdexcept>
#include <string>

namespace topoctl {

// Base for every error raised by the library. The C API maps each subclass
// onto a distinct status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  explicit ParseError(const std::string& what) : ParseError(what, 0) {}
  int line() const noexcept { return line_; }

private:
  int line_ = 0;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

// A solve finished with a status that the caller cannot continue from
// (infeasible scenario, numerical failure).
class SolveError : public Error {
public:
  using Error::Error;
};

}  // namespace topoctl
