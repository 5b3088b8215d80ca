#pragma once

// Shared diagnostic record used by the problem parser, the validator, and
// the reformulation advisor. Every message carries a stable code so tooling
// can filter without string-matching prose.

#include <algorithm>
#include <string>
#include <vector>

namespace qrak {

enum class Severity { Error, Warning, Info };

inline const char* severity_name(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "?";
}

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;     // e.g. "DeclaredHidden", "AvailabilityMismatch"
  std::string message;  // human-readable detail
  int line = 0;         // 1-based source line, 0 when not tied to a location
  int col = 0;          // 1-based source column, 0 when unknown
};

inline std::string to_string(const Diagnostic& d) {
  std::string out = severity_name(d.severity);
  out += "[";
  out += d.code;
  out += "]";
  if (d.line > 0) {
    out += " line ";
    out += std::to_string(d.line);
    if (d.col > 0) {
      out += ":";
      out += std::to_string(d.col);
    }
  }
  out += ": ";
  out += d.message;
  return out;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

inline bool has_warnings(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Warning; });
}

}  // namespace qrak
