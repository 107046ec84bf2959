#pragma once

#include <stdexcept>
#include <string>

namespace cachesim {

// Bad configuration or bad input file contents. The CLI maps this to exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed trace or config text. Carries a 1-based line number when known.
struct ParseError : std::runtime_error {
  long line;
  explicit ParseError(const std::string& what, long line_ = 0)
      : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + what : what),
        line(line_) {}
};

// A broken internal invariant: a bug in this program, not a user error.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

// Always-on invariant check, independent of NDEBUG.
#define CS_CHECK(cond, msg)                          \
  do {                                               \
    if (!(cond)) throw ::cachesim::InvariantError(msg); \
  } while (0)

}  // namespace cachesim
