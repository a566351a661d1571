#pragma once

#include <stdexcept>
#include <string>

namespace circlefit {

enum class ErrorCode {
    Argument,      // violated precondition / bad input value
    Io,            // unreadable file or malformed dataset text
    Degenerate,    // data cannot support the requested fit (collinear, too few, coincident)
    Singular,      // linear system or null space not numerically solvable
    NonConverged,  // iterative solver exhausted its safeguards
    Internal,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace circlefit
