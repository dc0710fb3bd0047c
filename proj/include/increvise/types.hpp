#pragma once

#include <stdexcept>
#include <string>

namespace increvise {

// Virtual clock ticks. The engine never touches wall time.
using Tick = long long;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Errors raised while replaying a scenario (unknown ids, broken invariants).
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace increvise
