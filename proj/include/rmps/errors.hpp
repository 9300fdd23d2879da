#pragma once

#include <stdexcept>
#include <string>

namespace rmps {

// Requested dimension is zero or otherwise outside an operation's domain.
class InvalidDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operand shapes do not fit together.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A dense object would exceed its configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmps
