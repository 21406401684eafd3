// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace autoscale {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape, range, finiteness).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The input is well formed but the quantity is undefined for it, e.g. the
/// cosine between a zero gradient and anything else.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Malformed trace line, config file or score file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace autoscale
