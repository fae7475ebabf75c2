#pragma once

#include <stdexcept>
#include <string>

namespace ewhflex {

// Rejected input: bad parameter values, malformed configuration, contract
// violations. CLI maps this to exit status 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / stream failure. CLI maps this to exit status 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ewhflex
