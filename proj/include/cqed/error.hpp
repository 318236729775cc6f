#pragma once

#include <stdexcept>
#include <string>

namespace cqed {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A numerical routine could not produce a trustworthy result.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Malformed input file or configuration.
class ParseError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace cqed
