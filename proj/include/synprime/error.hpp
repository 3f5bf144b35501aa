#pragma once

#include <stdexcept>
#include <string>

namespace synprime {

// Malformed or inconsistent input data (files, lexicons, records).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical check failed (shape mismatch, degenerate design, oracle mismatch).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace synprime
