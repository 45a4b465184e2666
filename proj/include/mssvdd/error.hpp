#ifndef MSSVDD_ERROR_HPP
#define MSSVDD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mssvdd {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument or configuration violates a precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed or inconsistent input file.
class DataFormatError : public Error {
public:
  using Error::Error;
};

/// A numerical routine could not produce a valid result
/// (degenerate kernel, rank-deficient projection, non-converged solver).
class NumericalError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace mssvdd

#endif  // MSSVDD_ERROR_HPP
