#pragma once

#include <stdexcept>
#include <string>

namespace missbm {

/// Malformed or inconsistent user input (files, flags, shapes).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or failed numerical routines during inference.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace missbm
