#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wsd {

// Error categories drive both messages and CLI exit codes:
// Io maps to exit code 2, everything else to 1.
enum class ErrorKind {
  Parse,         // malformed input syntax (carries a line number where known)
  Format,        // wrong field count / layout in a line-oriented file
  Validation,    // structurally fine but semantically inconsistent data
  MissingSense,  // (lemma, pos) absent from the sense inventory
  GoldMismatch,  // no candidate sense matches any gold key
  Encoding,      // pair cannot be packed into the sequence budget
  Shape,         // ensemble member output dimensions disagree
  Config,        // bad run configuration
  Precondition,  // caller violated an operation contract
  Io,            // file missing / unreadable / unwritable
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Format: return "format";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::MissingSense: return "missing-sense";
    case ErrorKind::GoldMismatch: return "gold-mismatch";
    case ErrorKind::Encoding: return "encoding";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Config: return "config";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Io: return "io";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // One line, stable shape, meant for scripts reading stderr.
  std::string machine_line() const { return std::string("error: ") + what(); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace wsd
