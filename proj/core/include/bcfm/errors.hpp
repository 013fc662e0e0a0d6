#pragma once

#include <stdexcept>
#include <string>

namespace bcfm {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix required to be positive definite failed factorization.
// pivot() is the zero-based index of the first non-positive pivot.
class NotSpdError : public Error {
 public:
  NotSpdError(const std::string& what, int pivot)
      : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

// Malformed or unusable input data (shapes, missing/non-finite values, parse errors).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: dimensions, chain settings, CLI argument combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A cluster is too small for the moment estimates prior elicitation needs.
class SmallClusterError : public Error {
 public:
  SmallClusterError(const std::string& what, int cluster, int size)
      : Error(what), cluster_(cluster), size_(size) {}
  int cluster() const { return cluster_; }
  int size() const { return size_; }

 private:
  int cluster_;
  int size_;
};

// Numerical failure that names where it happened (e.g. an ill-conditioned solve).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bcfm
