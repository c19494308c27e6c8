#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace deriva {

// Failure taxonomy shared by the library, CLI and HTTP layers. Every error
// carries a machine code ("dataset_not_found") next to the human message;
// the CLI prints `code: message` and maps the kind to an exit code, the
// service maps it to an HTTP status.
enum class ErrorKind {
  NotFound,          // missing table/record/term/id
  Duplicate,         // name or record already exists
  Validation,        // bad input: types, nullability, formats, arguments
  DanglingReference, // value references a RID that is not live
  InboundReference,  // delete blocked by live references
  Cycle,             // dataset containment cycle
  Conflict,          // write-once field already set with different value
  Precondition,      // operation not allowed in current state
  Integrity,         // checksum/validation mismatch, corrupted storage
  Version,           // on-disk format version mismatch
  Io,                // filesystem / network failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string code,
                              const std::string& message) {
  throw Error(kind, std::move(code), message);
}

} // namespace deriva
