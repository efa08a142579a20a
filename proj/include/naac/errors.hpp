#pragma once

#include <stdexcept>
#include <string>

namespace naac {

enum class ErrorCode {
  contract = 1,   // precondition / invariant violated at a call boundary
  parse = 2,      // malformed or out-of-range configuration
  io = 3,         // file system failures
  too_large = 4,  // instance exceeds an explicit size guard
  internal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_contract(const std::string& msg) {
  throw Error(ErrorCode::contract, msg);
}
[[noreturn]] inline void throw_parse(const std::string& msg) {
  throw Error(ErrorCode::parse, msg);
}
[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorCode::io, msg);
}
[[noreturn]] inline void throw_too_large(const std::string& msg) {
  throw Error(ErrorCode::too_large, msg);
}

}  // namespace naac
