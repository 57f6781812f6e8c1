#pragma once
#include <stdexcept>
#include <string>

namespace epimeter {

// Error taxonomy; the CLI maps these to exit codes (config=1, runtime=2, io=3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// enumeration budget exceeded (exact-posterior oracles)
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// a coding run died mid-flight (non-finite loss, infinite KL, ...)
struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace epimeter
