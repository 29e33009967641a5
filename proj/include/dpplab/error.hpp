#pragma once

#include <stdexcept>
#include <string>

namespace dpplab {

enum class ErrorKind { validation, numerical, verification, io };

class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
  throw LabError(ErrorKind::validation, msg);
}

[[noreturn]] inline void fail_numerical(const std::string& msg) {
  throw LabError(ErrorKind::numerical, msg);
}

// process exit codes used by the CLI
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return 2;
    case ErrorKind::numerical: return 3;
    case ErrorKind::verification: return 4;
    case ErrorKind::io: return 1;
  }
  return 1;
}

}  // namespace dpplab
