#ifndef PARAFORGE_ERRORS_HPP
#define PARAFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace paraforge {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configuration, file, or argument.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A metric was handed a sequence with no tokens.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// No in-vocabulary token was available for an embedding-based operation.
class OovError : public Error {
 public:
  using Error::Error;
};

// A completion backend failed after exhausting retries.
class BackendError : public Error {
 public:
  BackendError(const std::string& backend, const std::string& what)
      : Error("backend '" + backend + "': " + what), backend_(backend) {}
  const std::string& backend() const { return backend_; }

 private:
  std::string backend_;
};

// A few-shot classification completion contained no recognizable label.
// Callers may count these as abstentions instead of hard failures.
class UnparseableCompletionError : public Error {
 public:
  using Error::Error;
};

}  // namespace paraforge

#endif
