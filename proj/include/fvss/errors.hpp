#pragma once

#include <stdexcept>
#include <string>

namespace fvss {

// Bad user input (paths, config values, malformed files). The CLI maps this
// to exit code 1; any other exception reaching main is an internal failure
// and maps to exit code 2.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fvss
