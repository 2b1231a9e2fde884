#pragma once

#include <stdexcept>
#include <string>

namespace vfl {

// Base for every error raised by the library. A cryptographic reject is a
// result, never an exception.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EncodingOverflow : public Error {
 public:
  using Error::Error;
};

class DecodeRangeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class KeyGenerationError : public Error {
 public:
  using Error::Error;
};

class DeserializationError : public Error {
 public:
  using Error::Error;
};

class RegistrationConflict : public Error {
 public:
  using Error::Error;
};

class MissingKeyError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vfl
