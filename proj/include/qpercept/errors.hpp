#pragma once

#include <stdexcept>
#include <string>

namespace qpercept {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPure : public Error {
 public:
  using Error::Error;
};

class InvalidEfficiency : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// T/τ_D > 1: the short-time bounds are vacuous.
class OutOfRegime : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptySeries : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class MisalignedGrids : public Error {
 public:
  using Error::Error;
};

}  // namespace qpercept
