#pragma once

#include <stdexcept>
#include <string>

namespace harmapprox {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a mathematical operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Tabulated weight queried outside its sample range.
class TableRangeError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class QuadratureOrderError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, malformed input file or weight grammar.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotDoubling : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace harmapprox
