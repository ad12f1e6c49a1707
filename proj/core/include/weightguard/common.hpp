#pragma once

#include <stdexcept>
#include <string>

namespace wg {

// Domain error: a violated precondition or malformed input. The CLI maps
// these to exit code 1; usage errors are handled by the parser (exit 2).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void check(bool cond, const std::string& msg) {
    if (!cond) {
        throw Error(msg);
    }
}

} // namespace wg
