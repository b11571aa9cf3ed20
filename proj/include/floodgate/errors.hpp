#pragma once

#include <stdexcept>
#include <string>

namespace floodgate {

/// Precondition violation (bad sizes, out-of-range indices, invalid values).
class InvalidArgumentError : public std::invalid_argument {
 public:
  explicit InvalidArgumentError(const std::string& msg)
      : std::invalid_argument("invalid-argument: " + msg) {}
};

/// Malformed file contents; message names the offending row where known.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg)
      : std::runtime_error("format: " + msg) {}
};

/// Statistically degenerate input (constant series, zero variance).
class DegenerateInputError : public std::runtime_error {
 public:
  explicit DegenerateInputError(const std::string& msg)
      : std::runtime_error("degenerate-input: " + msg) {}
};

/// Numerical failure; message carries a remediation hint when one exists.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg)
      : std::runtime_error("numerical: " + msg) {}
};

/// Filesystem-level failure (missing file, unwritable directory).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg)
      : std::runtime_error("io: " + msg) {}
};

/// The counted f* evaluations disagree with the budget plan.
class LedgerError : public std::logic_error {
 public:
  explicit LedgerError(const std::string& msg)
      : std::logic_error("ledger: " + msg) {}
};

}  // namespace floodgate
