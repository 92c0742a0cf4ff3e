#include "pscript/diagnostics.hpp"

#include <json.hpp>

namespace pscript {

const char* severity_name(Severity s) {
  return s == Severity::kError ? "error" : "warning";
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string s = "line " + std::to_string(d.line);
  if (!d.section.empty()) s += " (" + d.section + ")";
  return s + ": " + severity_name(d.severity) + ": " + d.message;
}

std::string diagnostics_to_json(const std::vector<Diagnostic>& diags) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : diags) {
    out.push_back({{"severity", severity_name(d.severity)},
                   {"section", d.section},
                   {"line", d.line},
                   {"message", d.message}});
  }
  return out.dump();
}

std::string CompileError::summarize(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::kError) {
      std::string s = "line " + std::to_string(d.line) + ": " + d.message;
      if (!d.section.empty()) s = d.section + " " + s;
      return s;
    }
  }
  return "compile error";
}

CompileError::CompileError(std::vector<Diagnostic> diags)
    : std::runtime_error(summarize(diags)), diags_(std::move(diags)) {}

CompileError::CompileError(std::string section, int line, std::string message)
    : CompileError(std::vector<Diagnostic>{
          {Severity::kError, std::move(section), line, std::move(message)}}) {}

UnsupportedFeatureError::UnsupportedFeatureError(std::string feature, int line)
    : CompileError("rules", line,
                   "unsupported feature: '" + feature + "' is not implemented"),
      feature_(std::move(feature)) {}

}  // namespace pscript
