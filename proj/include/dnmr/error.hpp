#ifndef DNMR_ERROR_HPP
#define DNMR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dnmr {

/// A violated precondition or record invariant. The message names the invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed configuration text. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

inline void require(bool cond, const char* invariant) {
  if (!cond) throw ValidationError(invariant);
}

inline void require(bool cond, const std::string& invariant) {
  if (!cond) throw ValidationError(invariant);
}

}  // namespace dnmr

#endif
