#pragma once

#include <stdexcept>
#include <string>

namespace brx {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IllegalActionError : public Error {
public:
  using Error::Error;
};

class RoleViolationError : public Error {
public:
  using Error::Error;
};

class SchemaMismatchError : public Error {
public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class GatingError : public Error {
public:
  using Error::Error;
};

class BackendError : public Error {
public:
  BackendError(const std::string& what, int attempts, bool retriable = true)
      : Error(what + " (after " + std::to_string(attempts) + " attempt" +
              (attempts == 1 ? "" : "s") + ")"),
        attempts_(attempts),
        retriable_(retriable) {}

  int attempts() const noexcept { return attempts_; }
  // False for failures a resend cannot fix, e.g. a rejected credential.
  bool retriable() const noexcept { return retriable_; }

private:
  int attempts_;
  bool retriable_;
};

class EvalError : public Error {
public:
  using Error::Error;
};

}  // namespace brx
