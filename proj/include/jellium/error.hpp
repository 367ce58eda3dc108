#pragma once

#include <stdexcept>
#include <string>

namespace jellium {

// Every failure the library reports derives from Error so callers (the CLI in
// particular) can map the concrete type onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidBackground : public Error {
 public:
  using Error::Error;
};

class NonIntegrableBackground : public Error {
 public:
  using Error::Error;
};

// alpha <= n - 1: the Boltzmann-Gibbs measure does not exist.
class InadmissibleGas : public Error {
 public:
  using Error::Error;
};

class NonNormalizableDensity : public Error {
 public:
  using Error::Error;
};

class MaxAttemptsExceeded : public Error {
 public:
  MaxAttemptsExceeded(const std::string& what, long long attempts)
      : Error(what), attempts_(attempts) {}
  long long attempts() const noexcept { return attempts_; }

 private:
  long long attempts_;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class UnsortedInput : public Error {
 public:
  using Error::Error;
};

class DepthTooSmall : public Error {
 public:
  using Error::Error;
};

class WindowTooDeep : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string pointer, const std::string& message)
      : Error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace jellium
