#pragma once

#include <stdexcept>
#include <string>

namespace uniseq {

// Invalid arguments, shape mismatches and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: bad magic, truncated files, unparsable sequences.
class FormatError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace uniseq
