#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pscript {

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::string section;  // "prelude", "objects", ..., "levels"; empty when unknown
  int line = 0;         // 1-based line in the original source, 0 when unknown
  std::string message;
};

const char* severity_name(Severity s);

// "line 12 (rules): error: message"
std::string format_diagnostic(const Diagnostic& d);

// JSON array of {severity, section, line, message}.
std::string diagnostics_to_json(const std::vector<Diagnostic>& diags);

// Raised by the parser and the compiler. Carries every error found so far
// plus any warnings collected before the failure.
class CompileError : public std::runtime_error {
 public:
  explicit CompileError(std::vector<Diagnostic> diags);
  CompileError(std::string section, int line, std::string message);

  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  static std::string summarize(const std::vector<Diagnostic>& diags);
  std::vector<Diagnostic> diags_;
};

// Thrown for features the engine deliberately does not implement.
class UnsupportedFeatureError : public CompileError {
 public:
  UnsupportedFeatureError(std::string feature, int line);
  const std::string& feature() const { return feature_; }

 private:
  std::string feature_;
};

}  // namespace pscript
