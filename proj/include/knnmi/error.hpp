#pragma once

#include <stdexcept>
#include <string>

namespace knnmi {

// Broad failure classes; the C API maps each one onto a status code.
enum class ErrorKind {
  InvalidArgument,
  Domain,
  Ingestion,
  DuplicateSample,
  Validation,
  DegenerateStatistic,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace knnmi
