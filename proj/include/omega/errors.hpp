#pragma once

#include <stdexcept>
#include <string>

namespace omega {

/// Base of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands disagree on prime, level or space shape.
class structural_error : public error {
 public:
  using error::error;
};

/// Input lies outside the mathematical domain of the operation (non-unit, non-maximal, ...).
class domain_error : public error {
 public:
  using error::error;
};

/// A documented precondition on the arguments was violated.
class precondition_error : public error {
 public:
  using error::error;
};

/// A computation would exceed a configured size bound.
class resource_error : public error {
 public:
  using error::error;
};

/// Invalid experiment configuration; the message names the offending field.
class usage_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

}  // namespace omega
