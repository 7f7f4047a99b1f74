#pragma once

#include <stdexcept>
#include <string>

namespace tmpd {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A winding number was requested about a point lying on the curve.
class CenterOnCurve : public Error {
public:
  using Error::Error;
};

class EndpointMismatch : public Error {
public:
  using Error::Error;
};

/// Difference of two windings about an obstacle center is not close to an integer.
class NonIntegerLoop : public Error {
public:
  using Error::Error;
};

/// No collision-free candidate survived filtering.
class EmptyPool : public Error {
public:
  using Error::Error;
};

class DegenerateEndpoints : public Error {
public:
  using Error::Error;
};

class InputInCollision : public Error {
public:
  using Error::Error;
};

class GenerationFailed : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace tmpd
