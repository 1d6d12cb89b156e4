#ifndef RELPARSE_ERRORS_H_
#define RELPARSE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace relparse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A softmax row with no attendable position.
class InvalidMaskError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: bad spans, unknown labels, bad files.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace relparse

#endif  // RELPARSE_ERRORS_H_
