#pragma once

#include <stdexcept>
#include <string>

namespace mmm {

/// Raised for malformed or inconsistent user input: files, configs, ids,
/// parameters. The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  InputError(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Raised when a numerical procedure cannot produce a usable result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmm
