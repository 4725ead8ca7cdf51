#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace speck {

// Half-open source range, 1-based lines and columns.
struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

inline std::string to_string(const Span& s) {
  return std::to_string(s.line) + ":" + std::to_string(s.col);
}

// Machine-readable diagnostic. `code` is a stable kebab-case identifier
// (e.g. "cyclic-subsort", "parse-error") that tools can match on.
struct Diagnostic {
  std::string code;
  std::string message;
  Span span;

  std::string render() const {
    std::string out = code;
    if (span.line > 0) out += " at " + to_string(span);
    out += ": " + message;
    return out;
  }
};

class SpecError : public std::runtime_error {
 public:
  explicit SpecError(Diagnostic d) : std::runtime_error(d.render()), diag(std::move(d)) {}
  Diagnostic diag;
};

[[noreturn]] inline void fail(std::string code, std::string message, Span span = {}) {
  throw SpecError(Diagnostic{std::move(code), std::move(message), span});
}

}  // namespace speck
