#pragma once

#include <stdexcept>
#include <string>

namespace obcsaa {

// Error categories mirrored one-to-one by the C API status codes.
enum class ErrorCode : int {
  Argument = 1,    // parameter outside its documented domain
  Dimension = 2,   // vector/matrix shape mismatch
  Infeasible = 3,  // constraint violated, or empty schedule
  Format = 4,      // malformed configuration or dataset file
  Io = 5,          // file system failure
  Numeric = 6,     // non-finite values where finite ones are required
  Internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace obcsaa
