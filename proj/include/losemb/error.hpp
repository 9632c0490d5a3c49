#pragma once

#include <stdexcept>
#include <string>

namespace losemb {

/// Bad input data: malformed files, out-of-range ids, shape mismatches.
/// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant did not hold. The CLI maps this to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace losemb
